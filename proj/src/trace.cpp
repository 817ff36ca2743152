#include "dcrf/trace.hpp"

#include "dcrf/pairwise.hpp"

namespace dcrf {

EnergyFn trace_energy(const CrfModel& model, const PairwiseOperator& op, Index exact_limit) {
  if (model.n_pixels() <= exact_limit)
    return [&model](const DiscreteLabeling& x) { return discrete_energy(model, x); };
  return [&model, &op](const DiscreteLabeling& x) { return discrete_energy(model, op, x); };
}

}  // namespace dcrf
