#pragma once

#include "dcrf/model.hpp"
#include "dcrf/trace.hpp"

namespace dcrf {

class PairwiseOperator;

struct MeanFieldState {
  Matrix q;
  int iteration = 0;
};

// Row-wise softmax of -energy.
Matrix softmax_neg(const Matrix& energy);

// Expected energy of the factorized distribution Q.
double mf_expected_energy(const CrfModel& model, const PairwiseOperator& op, const Matrix& q);

// One parallel update: Q' = softmax(-(phi + 2 Psi Q + clique messages)).
Matrix mf_update(const CrfModel& model, const PairwiseOperator& op, const Matrix& q,
                 Execution exec = Execution::Parallel);

struct MfResult {
  Matrix q;
  EnergyTrace trace;
};

MfResult mf_minimise(const CrfModel& model, const PairwiseOperator& op, int iters = 5,
                     const EnergyFn& energy = {}, Execution exec = Execution::Parallel);

}  // namespace dcrf
