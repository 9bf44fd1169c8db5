#include "spdhg/trace.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>

namespace spdhg {

double RunTrace::flops_per_iteration() const {
  return iterations > 0
             ? static_cast<double>(update_flops) / static_cast<double>(iterations)
             : 0.0;
}

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

namespace {

void append_field(std::string& line, double v) {
  if (!std::isnan(v)) line += format_double(v);
}

}  // namespace

void write_trace_csv(std::ostream& out, const RunTrace& trace) {
  out << trace_csv(trace);
}

std::string trace_csv(const RunTrace& trace) {
  std::string out = "iter,epoch,objective,test_loss,gap,elapsed_ms\n";
  for (const TraceRow& row : trace.rows) {
    out += std::to_string(row.iter);
    out += ',';
    append_field(out, row.epoch);
    out += ',';
    append_field(out, row.objective);
    out += ',';
    append_field(out, row.test_loss);
    out += ',';
    append_field(out, row.gap);
    out += ',';
    append_field(out, row.elapsed_ms);
    out += '\n';
  }
  return out;
}

}  // namespace spdhg
