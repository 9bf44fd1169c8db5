#pragma once

#include <cstdint>
#include <limits>
#include <ostream>
#include <string>
#include <vector>

#include "spdhg/linalg.hpp"

namespace spdhg {

// One checkpoint row. `gap` and `test_loss` are NaN when no reference point
// or test set was supplied; the CSV writer leaves those fields empty.
struct TraceRow {
  std::int64_t iter = 0;
  double epoch = 0.0;
  double objective = 0.0;
  double test_loss = std::numeric_limits<double>::quiet_NaN();
  double gap = std::numeric_limits<double>::quiet_NaN();
  double elapsed_ms = 0.0;
};

struct RunTrace {
  std::vector<TraceRow> rows;
  // Final averaged iterates (last iterates for the ADMM baseline, which does
  // not average; its y_bar holds the multiplier).
  Vec x_bar;
  Vec y_bar;
  std::int64_t iterations = 0;
  // Analytic floating-op count charged to solver updates (metric evaluation
  // excluded). Depends only on the instance and the sample path.
  std::uint64_t update_flops = 0;
  // ||z - Fx|| at exit; ADMM only, NaN otherwise.
  double constraint_residual = std::numeric_limits<double>::quiet_NaN();
  bool aborted = false;
  std::string abort_reason;

  double flops_per_iteration() const;
};

// Writes "iter,epoch,objective,test_loss,gap,elapsed_ms" rows. Floats are
// printed with 17 significant digits so the file round-trips exactly; NaN
// fields are left empty.
void write_trace_csv(std::ostream& out, const RunTrace& trace);
std::string trace_csv(const RunTrace& trace);

// %.17g formatting used by every text artifact.
std::string format_double(double v);

}  // namespace spdhg
