#pragma once
#include <string>
#include <utility>
#include <vector>

#include "hhri/pipelines.hpp"

namespace hhri {

/// Resolved configuration echoed into every output file for provenance.
using MetaMap = std::vector<std::pair<std::string, std::string>>;

/// Full round-trip decimal formatting (17 significant digits).
std::string format_double(double v);

// --- delimiter-separated text -----------------------------------------------

/// Header comments (# key = value), then "x,p_x" rows.
void save_island_csv(const std::string& path, const ReactiveIsland& island,
                     const MetaMap& meta);
ReactiveIsland load_island_csv(const std::string& path);

/// Header comments, a column-name row, then one row per sample
/// (features..., label, escape_time; escape_time is nan for non-reactive).
void save_dataset_csv(const std::string& path, const LabeledDataset& ds, const MetaMap& meta);
/// Reads back a dataset; the echoed metadata is returned through meta_out.
LabeledDataset load_dataset_csv(const std::string& path, MetaMap* meta_out = nullptr);

/// Generic numeric table with # comments and a header row.
void save_table_csv(const std::string& path, const std::vector<std::string>& columns,
                    const std::vector<std::vector<double>>& rows, const MetaMap& meta);

// --- structured text (JSON) --------------------------------------------------

/// Serializes classes, per-pair support points, dual coefficients, biases,
/// kernel parameters and scaler; reload reproduces identical predictions.
void save_model_json(const std::string& path, const SvcModel& model, const MetaMap& meta);
SvcModel load_model_json(const std::string& path, MetaMap* meta_out = nullptr);

struct TrainingReport {
    CvReport cv;
    EvaluationReport eval;
    long support_count = 0;
    std::vector<EvaluationReport> history;  ///< active-learning iterations
};

void save_report_json(const std::string& path, const TrainingReport& report,
                      const MetaMap& meta);

} // namespace hhri
