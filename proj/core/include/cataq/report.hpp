#ifndef CATAQ_REPORT_HPP
#define CATAQ_REPORT_HPP

#include "cataq/config.hpp"

// Command runners behind the CLI. Every command writes UTF-8 CSV tables with
// a header row plus a plain-text summary into the output directory. Each
// comparison row carries a provenance column naming the evaluation path that
// produced the analytic value.

namespace cataq {

// Dispatches on manifest.command. Returns the process exit status: 0 iff
// every comparison row is within tolerance (non-compare commands return 0
// unless a module rejects the request).
int run_command(const RunConfig& config, const RunManifest& manifest);

int run_transient(const RunConfig& config, const RunManifest& manifest);
int run_busy(const RunConfig& config, const RunManifest& manifest);
int run_simulate(const RunConfig& config, const RunManifest& manifest);
int run_compare(const RunConfig& config, const RunManifest& manifest);

}  // namespace cataq

#endif
