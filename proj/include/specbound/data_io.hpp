#pragma once

#include <cstdint>
#include <string>

#include "specbound/bounds.hpp"
#include "specbound/dataset.hpp"
#include "specbound/network.hpp"
#include "specbound/train.hpp"
#include "specbound/verify.hpp"

namespace specbound {

// k Gaussian clusters with pairwise center distance >= separation, every
// sample clamped radially into the B-ball, class counts balanced (±1).
// Throws usage_error when the centers cannot fit inside the ball.
Dataset gen_blobs(int k, int n, int m, double separation, double norm_bound,
                  std::uint64_t seed);

// IDX (MNIST-family) big-endian ingestion: pixels scaled to [0,1], flattened
// row-major, then globally scaled so the max sample norm equals b_scale.
// max_count <= 0 means all samples. Throws format_error naming the offending
// field and byte offset.
Dataset load_idx(const std::string& images_path, const std::string& labels_path,
                 int max_count, double b_scale);

// Delimited text with a metadata comment line carrying B, then a header row,
// then label-first rows.
void save_dataset(const Dataset& data, const std::string& path);
Dataset load_dataset(const std::string& path);

// JSON schema {format: "specbound-net-v1", kind, activation, layers:
// [{rows, cols, data}]}, entries round-tripping bit-exactly.
void save_network(const Network& net, const std::string& path);
Network load_network(const std::string& path);

enum class ReportFormat { json, csv };

// Stamped into every report so two reports are comparable only when their
// convention flags match. No timestamps: report bytes are a pure function of
// inputs and flags.
struct Provenance {
  std::uint64_t seed = 0;
  std::string tool_version = "specbound 0.1.0";
  std::string constant_convention = "lemma-exact";
  bool union_bound = false;
};

void write_report(const BoundReport& report, const std::string& path,
                  ReportFormat format, const Provenance& prov);
void write_report(const SuiteSummary& summary, const std::string& path,
                  ReportFormat format, const Provenance& prov);

// JSON fragments used by write_report and the CLI's combined analysis
// document. Numerics render in scientific notation with 6 significant
// digits; field order is fixed.
std::string report_json(const BoundReport& report);
std::string report_json(const SuiteSummary& summary);
std::string provenance_json(const Provenance& prov);
std::string report_csv(const BoundReport& report, const Provenance& prov);
std::string report_csv(const SuiteSummary& summary, const Provenance& prov);

// One row per epoch: epoch, loss, error, margin_median, phi, then per-layer
// spectral/frobenius pairs.
void save_history(const TrainHistory& history, const std::string& path);

// %.5e rendering shared by every report surface.
std::string sci(double v);

}  // namespace specbound
