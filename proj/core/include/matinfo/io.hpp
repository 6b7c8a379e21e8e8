// File ingestion and serialization: 2-D npy (v1.0, f4/f8, C-order), CSV with
// one sample per row, JSONL metric logs, JSON collapse reports and the
// checkpoint document format.
#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "matinfo/collapse.hpp"
#include "matinfo/metrics.hpp"
#include "matinfo/trainer.hpp"

namespace matinfo {

// Reads a 2-D little-endian f4/f8 C-order npy file. Throws ParseError on any
// malformed header, Fortran order, or unsupported dtype.
Eigen::MatrixXd read_npy(const std::string& path);

// Writes an f8 C-order npy v1.0 file; read_npy round-trips it bit-exactly.
void write_npy(const std::string& path, const Eigen::MatrixXd& m);

// Comma-separated values, one sample per row, optional single header row.
// Returned in file orientation (rows x columns).
Eigen::MatrixXd read_csv(const std::string& path);

// Dispatches on extension (.npy / .csv) and returns the matrix in feature
// orientation (d rows, one column per sample); CSV is transposed.
Eigen::MatrixXd read_matrix_file(const std::string& path);

// Integer labels from an npy or csv vector (one row or one column).
std::vector<int> read_labels(const std::string& path);

// One JSONL object with keys
// {step, split, h_feat, h_weights, mi, mir, hdr, accuracy, loss}.
std::string metric_record_to_jsonl(const MetricRecord& record);

std::vector<MetricRecord> read_metrics_jsonl(const std::string& path);

std::string nc_report_to_json(const NcReport& report);

// Checkpoint document: architecture descriptor, named layers with base64
// little-endian f8 payloads, the train config, step and RNG digest.
// Round-trips bit-exactly.
void save_checkpoint(const std::string& path, const Checkpoint& checkpoint);
Checkpoint load_checkpoint(const std::string& path);

}  // namespace matinfo
