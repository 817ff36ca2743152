#pragma once

#include "dcrf/model.hpp"

#include <chrono>
#include <functional>
#include <vector>

namespace dcrf {

struct TraceRecord {
  int iteration = 0;
  double seconds = 0.0;
  double discrete_energy = 0.0;
  double relaxed_objective = 0.0;
};

struct EnergyTrace {
  std::vector<TraceRecord> records;

  std::size_t size() const { return records.size(); }
  const TraceRecord& operator[](std::size_t i) const { return records[i]; }
};

// Evaluates the energy of the rounded iterate for the trace.
using EnergyFn = std::function<double(const DiscreteLabeling&)>;

// Exact discrete_energy when N <= exact_limit, filtered through op otherwise.
EnergyFn trace_energy(const CrfModel& model, const PairwiseOperator& op, Index exact_limit = 4096);

// Wall clock that can be paused so trace bookkeeping is not billed to the solver.
class Stopwatch {
 public:
  Stopwatch() : start_(Clock::now()) {}
  double seconds() const {
    auto now = paused_ ? pause_start_ : Clock::now();
    return std::chrono::duration<double>(now - start_).count() - excluded_;
  }
  void pause() {
    if (!paused_) {
      paused_ = true;
      pause_start_ = Clock::now();
    }
  }
  void resume() {
    if (paused_) {
      paused_ = false;
      excluded_ += std::chrono::duration<double>(Clock::now() - pause_start_).count();
    }
  }

 private:
  using Clock = std::chrono::steady_clock;
  Clock::time_point start_;
  Clock::time_point pause_start_;
  double excluded_ = 0.0;
  bool paused_ = false;
};

}  // namespace dcrf
