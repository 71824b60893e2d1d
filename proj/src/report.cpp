#include "inrep/report.hpp"

#include <fstream>

#include "inrep/errors.hpp"
#include "json.hpp"

namespace inrep {

namespace {

nlohmann::json metrics_json(const MetricsReport& m) {
  nlohmann::json j;
  j["overall_w2"] = m.overall_w2;
  j["per_class_w2"] = m.per_class_w2;
  j["recall"] = m.recall;
  j["conditional_accuracy"] = m.conditional_acc;
  j["cas_lite"] = m.cas;
  return j;
}

MetricsReport metrics_from(const nlohmann::json& j) {
  MetricsReport m;
  m.overall_w2 = j.at("overall_w2").get<double>();
  m.per_class_w2 = j.at("per_class_w2").get<std::vector<double>>();
  m.recall = j.at("recall").get<double>();
  m.conditional_acc = j.at("conditional_accuracy").get<double>();
  m.cas = j.at("cas_lite").get<double>();
  return m;
}

}  // namespace

std::string metrics_to_json(const MetricsReport& m) { return metrics_json(m).dump(2); }

MetricsReport metrics_from_json(const std::string& text) {
  return metrics_from(nlohmann::json::parse(text));
}

std::string run_report_to_json(const RunReport& report, const std::string& config_snapshot) {
  nlohmann::json j;
  j["config_snapshot"] = config_snapshot;
  j["iters_run"] = report.iters_run;
  j["wall_seconds"] = report.wall_seconds;
  j["ugan_digest_before"] = report.ugan_digest_before;
  j["ugan_digest_after"] = report.ugan_digest_after;
  j["clip_active"] = report.clip_active;
  j["clip_total"] = report.clip_total;
  j["spectral_cap_max"] = report.spectral_cap_max;
  j["aborted"] = report.aborted;
  j["abort_reason"] = report.abort_reason;
  nlohmann::json snaps = nlohmann::json::array();
  for (const Snapshot& s : report.snapshots) {
    nlohmann::json e;
    e["iter"] = s.iter;
    e["metrics"] = metrics_json(s.metrics);
    snaps.push_back(std::move(e));
  }
  j["snapshots"] = std::move(snaps);
  j["final_metrics"] = metrics_json(report.final_metrics);
  nlohmann::json fig;
  fig["labels"] = report.figure_labels;
  fig["points"] = report.figure_samples.vec_data();
  j["figure_samples"] = std::move(fig);
  return j.dump(2);
}

RunReport run_report_from_json(const std::string& text, std::string* config_snapshot) {
  nlohmann::json j = nlohmann::json::parse(text);
  RunReport report;
  if (config_snapshot) *config_snapshot = j.value("config_snapshot", "");
  report.iters_run = j.at("iters_run").get<std::size_t>();
  report.wall_seconds = j.at("wall_seconds").get<double>();
  report.ugan_digest_before = j.at("ugan_digest_before").get<std::string>();
  report.ugan_digest_after = j.at("ugan_digest_after").get<std::string>();
  report.clip_active = j.at("clip_active").get<std::size_t>();
  report.clip_total = j.at("clip_total").get<std::size_t>();
  report.spectral_cap_max = j.at("spectral_cap_max").get<double>();
  report.aborted = j.at("aborted").get<bool>();
  report.abort_reason = j.at("abort_reason").get<std::string>();
  for (const auto& e : j.at("snapshots")) {
    Snapshot s;
    s.iter = e.at("iter").get<std::size_t>();
    s.metrics = metrics_from(e.at("metrics"));
    report.snapshots.push_back(std::move(s));
  }
  report.final_metrics = metrics_from(j.at("final_metrics"));
  const auto& fig = j.at("figure_samples");
  report.figure_labels = fig.at("labels").get<std::vector<std::size_t>>();
  std::vector<double> pts = fig.at("points").get<std::vector<double>>();
  report.figure_samples = Tensor({report.figure_labels.size(), 2}, std::move(pts));
  return report;
}

void save_run_report(const RunReport& report, const std::string& config_snapshot,
                     const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw usage_error("save_run_report: cannot open " + path);
  out << run_report_to_json(report, config_snapshot);
}

RunReport load_run_report(const std::string& path, std::string* config_snapshot) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw usage_error("load_run_report: cannot open " + path);
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return run_report_from_json(text, config_snapshot);
}

}  // namespace inrep
