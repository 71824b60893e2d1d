#pragma once

#include <string>

#include "inrep/metrics.hpp"
#include "inrep/trainer.hpp"

namespace inrep {

std::string metrics_to_json(const MetricsReport& m);
MetricsReport metrics_from_json(const std::string& text);

// RunReport round trip; config_snapshot is a flat key=value rendering of the
// run's full configuration so every run is reproducible from the file alone.
std::string run_report_to_json(const RunReport& report, const std::string& config_snapshot);
RunReport run_report_from_json(const std::string& text, std::string* config_snapshot = nullptr);

void save_run_report(const RunReport& report, const std::string& config_snapshot,
                     const std::string& path);
RunReport load_run_report(const std::string& path, std::string* config_snapshot = nullptr);

}  // namespace inrep
