#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "oodt/detectors.hpp"
#include "oodt/distributions.hpp"
#include "oodt/metrics.hpp"

namespace oodt {

/// IEEE-754 double with 17 significant digits (%.17g); round-trips exactly.
std::string format_double(double x);

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& content);

/// FNV-1a 64-bit content hash, hex encoded; used for artifact manifests.
std::string fnv1a64_hex(const std::string& bytes);

// Sample CSV: header f0,f1,..., one observation per row.
std::string sample_to_csv(const Sample& sample);
Sample sample_from_csv(const std::string& text);
void write_sample_csv(const Sample& sample, const std::string& path);
Sample read_sample_csv(const std::string& path);

// DiscretePmf CSV: columns support,weight.
std::string pmf_to_csv(const DiscretePmf& pmf);
DiscretePmf pmf_from_csv(const std::string& text);
void write_pmf_csv(const DiscretePmf& pmf, const std::string& path);
DiscretePmf read_pmf_csv(const std::string& path);

// Softmax CSV: header p0,...,p{k-1},label with label 0 = ID, 1 = OOD.
// Rows violating the simplex constraint beyond 1e-6 are rejected with their
// row number.
struct LabeledSoftmax {
  std::vector<SoftmaxVector> vectors;
  std::vector<int> labels;
};
std::string softmax_to_csv(const LabeledSoftmax& data);
LabeledSoftmax softmax_from_csv(const std::string& text);
LabeledSoftmax read_softmax_csv(const std::string& path);

// Scored CSV: columns score,label.
std::string scored_to_csv(const ScoredLabels& data);
ScoredLabels scored_from_csv(const std::string& text);
ScoredLabels read_scored_csv(const std::string& path);

}  // namespace oodt
