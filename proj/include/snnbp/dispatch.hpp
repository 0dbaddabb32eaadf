#pragma once

#include "snnbp/config.hpp"

namespace snnbp {

// Runs the configured command and writes its artifacts into output_dir: the
// report CSVs, manifest.json, effective_config.ini, a final-control
// checkpoint where the command trains one, and optional SVG plots. Returns
// the process exit status; failures leave a manifest with status "failed".
int dispatch(const RunConfig& config);

}  // namespace snnbp
