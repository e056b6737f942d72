#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "entrovol/arimax.hpp"
#include "entrovol/entropy.hpp"
#include "entrovol/ml.hpp"
#include "entrovol/series.hpp"

namespace entrovol::pipeline {

inline constexpr const char* kToolVersion = "1.0.0";
inline constexpr int kSchemaVersion = 1;

struct PipelineConfig {
    std::filesystem::path input;  // FRED CSV for ingest/all; price CSV for rolling (default: out/prices_clean.csv)
    std::filesystem::path out_dir = "out";
    series::RollingConfig rolling{};
    entropy::SampEnParams sampen{};
    arimax::ArimaxSpec order{4, 1, 3, true};
    bool auto_order = false;
    std::size_t horizon = 300;
    std::size_t ljung_box_lags = 10;
    ml::MlConfig ml{};
    std::uint64_t seed = 20230410;
    bool write_effective_r = false;
    int svg_width = 900;
    int svg_height = 420;

    nlohmann::json to_json() const;
};

/// Files a stage wrote (absolute or out_dir-relative paths) plus its JSON summary.
struct StageResult {
    std::vector<std::filesystem::path> files;
    nlohmann::json summary;
};

StageResult cmd_ingest(const PipelineConfig& config);
StageResult cmd_rolling(const PipelineConfig& config);
StageResult cmd_diagnose(const PipelineConfig& config);
StageResult cmd_arimax(const PipelineConfig& config);
StageResult cmd_ml(const PipelineConfig& config);

/// ingest -> rolling -> diagnose -> arimax -> ml, then manifest.json and run_report.json.
/// Returns the run report.
nlohmann::json cmd_all(const PipelineConfig& config);

/// {"schema_version", "files": [{"path", "bytes", "sha256"}]} sorted by path.
nlohmann::json build_manifest(const std::filesystem::path& out_dir, const std::vector<std::filesystem::path>& files);

/// 12-significant-digit JSON number; null for non-finite values.
nlohmann::json num(double v);

nlohmann::json to_json(const stats::TestResult& r);

/// Rolling CSV: "date,value,defined[,effective_r]"; undefined windows write "nan".
std::string render_rolling_csv(const series::RollingSeries& s, bool with_effective_r);
series::RollingSeries read_rolling_csv(const std::filesystem::path& path);

}  // namespace entrovol::pipeline
