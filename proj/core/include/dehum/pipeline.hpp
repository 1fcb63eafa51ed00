#pragma once

#include "dehum/config.hpp"

namespace dehum {

// Pipeline commands. Each reads its inputs from disk, writes its outputs
// under config.out_dir and records them in out_dir/manifest.json. Errors
// surface as exceptions: ConfigError for user mistakes (missing inputs,
// bad settings), Error for everything else.
void cmd_ingest(const PipelineConfig& config);
void cmd_train(const PipelineConfig& config);
void cmd_measure(const PipelineConfig& config);
void cmd_extremes(const PipelineConfig& config);
void cmd_report(const PipelineConfig& config);

} // namespace dehum
