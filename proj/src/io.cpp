#include "oodt/io.hpp"

#include <cerrno>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace oodt {

namespace {

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::istringstream in(line);
  while (std::getline(in, field, ',')) fields.push_back(field);
  if (!line.empty() && line.back() == ',') fields.emplace_back();
  return fields;
}

std::vector<std::string> split_lines(const std::string& text) {
  std::vector<std::string> lines;
  std::string line;
  std::istringstream in(text);
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(line);
  }
  while (!lines.empty() && lines.back().empty()) lines.pop_back();
  return lines;
}

double parse_double(const std::string& field, std::size_t row,
                    std::size_t col) {
  errno = 0;
  char* end = nullptr;
  const double value = std::strtod(field.c_str(), &end);
  if (end == field.c_str() || *end != '\0' || errno == ERANGE) {
    throw std::runtime_error("CSV parse error at row " + std::to_string(row) +
                             ", column " + std::to_string(col) +
                             ": bad number '" + field + "'");
  }
  return value;
}

}  // namespace

std::string format_double(double x) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw std::runtime_error("cannot open file for reading: " + path);
  }
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) {
    throw std::runtime_error("cannot open file for writing: " + path);
  }
  out << content;
  if (!out) {
    throw std::runtime_error("failed to write file: " + path);
  }
}

std::string fnv1a64_hex(const std::string& bytes) {
  std::uint64_t hash = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    hash ^= c;
    hash *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(hash));
  return buf;
}

std::string sample_to_csv(const Sample& sample) {
  std::ostringstream out;
  for (Eigen::Index j = 0; j < sample.cols(); ++j) {
    if (j > 0) out << ',';
    out << 'f' << j;
  }
  out << '\n';
  for (Eigen::Index i = 0; i < sample.rows(); ++i) {
    for (Eigen::Index j = 0; j < sample.cols(); ++j) {
      if (j > 0) out << ',';
      out << format_double(sample.values()(i, j));
    }
    out << '\n';
  }
  return out.str();
}

Sample sample_from_csv(const std::string& text) {
  const auto lines = split_lines(text);
  if (lines.size() < 2) {
    throw std::runtime_error("sample CSV needs a header and at least one row");
  }
  const auto header = split_line(lines[0]);
  const std::size_t d = header.size();
  if (d == 0) throw std::runtime_error("sample CSV has an empty header");
  Eigen::MatrixXd values(static_cast<Eigen::Index>(lines.size() - 1),
                         static_cast<Eigen::Index>(d));
  for (std::size_t r = 1; r < lines.size(); ++r) {
    const auto fields = split_line(lines[r]);
    if (fields.size() != d) {
      throw std::runtime_error(
          "CSV parse error at row " + std::to_string(r + 1) + ": expected " +
          std::to_string(d) + " columns, got " + std::to_string(fields.size()));
    }
    for (std::size_t c = 0; c < d; ++c) {
      values(static_cast<Eigen::Index>(r - 1), static_cast<Eigen::Index>(c)) =
          parse_double(fields[c], r + 1, c + 1);
    }
  }
  return Sample(std::move(values));
}

void write_sample_csv(const Sample& sample, const std::string& path) {
  write_text_file(path, sample_to_csv(sample));
}

Sample read_sample_csv(const std::string& path) {
  return sample_from_csv(read_text_file(path));
}

std::string pmf_to_csv(const DiscretePmf& pmf) {
  std::ostringstream out;
  out << "support,weight\n";
  for (std::size_t i = 0; i < pmf.size(); ++i) {
    out << format_double(pmf.support()[i]) << ','
        << format_double(pmf.weights()[i]) << '\n';
  }
  return out.str();
}

DiscretePmf pmf_from_csv(const std::string& text) {
  const auto lines = split_lines(text);
  if (lines.size() < 2) {
    throw std::runtime_error("pmf CSV needs a header and at least one row");
  }
  std::vector<double> support;
  std::vector<double> weights;
  for (std::size_t r = 1; r < lines.size(); ++r) {
    const auto fields = split_line(lines[r]);
    if (fields.size() != 2) {
      throw std::runtime_error("CSV parse error at row " +
                               std::to_string(r + 1) +
                               ": expected 2 columns");
    }
    support.push_back(parse_double(fields[0], r + 1, 1));
    weights.push_back(parse_double(fields[1], r + 1, 2));
  }
  return DiscretePmf(std::move(support), std::move(weights));
}

void write_pmf_csv(const DiscretePmf& pmf, const std::string& path) {
  write_text_file(path, pmf_to_csv(pmf));
}

DiscretePmf read_pmf_csv(const std::string& path) {
  return pmf_from_csv(read_text_file(path));
}

std::string softmax_to_csv(const LabeledSoftmax& data) {
  std::ostringstream out;
  const std::size_t k = data.vectors.empty() ? 0 : data.vectors[0].classes();
  for (std::size_t j = 0; j < k; ++j) out << 'p' << j << ',';
  out << "label\n";
  for (std::size_t i = 0; i < data.vectors.size(); ++i) {
    for (double p : data.vectors[i].probs()) out << format_double(p) << ',';
    out << data.labels[i] << '\n';
  }
  return out.str();
}

LabeledSoftmax softmax_from_csv(const std::string& text) {
  const auto lines = split_lines(text);
  if (lines.size() < 2) {
    throw std::runtime_error(
        "softmax CSV needs a header and at least one row");
  }
  const auto header = split_line(lines[0]);
  if (header.size() < 2 || header.back() != "label") {
    throw std::runtime_error(
        "softmax CSV header must be p0,...,p{k-1},label");
  }
  const std::size_t k = header.size() - 1;
  LabeledSoftmax data;
  for (std::size_t r = 1; r < lines.size(); ++r) {
    const auto fields = split_line(lines[r]);
    if (fields.size() != k + 1) {
      throw std::runtime_error("CSV parse error at row " +
                               std::to_string(r + 1) + ": expected " +
                               std::to_string(k + 1) + " columns");
    }
    std::vector<double> probs(k);
    for (std::size_t c = 0; c < k; ++c) {
      probs[c] = parse_double(fields[c], r + 1, c + 1);
    }
    const double label = parse_double(fields[k], r + 1, k + 1);
    if (label != 0.0 && label != 1.0) {
      throw std::runtime_error("softmax CSV row " + std::to_string(r + 1) +
                               ": label must be 0 or 1");
    }
    try {
      data.vectors.emplace_back(std::move(probs));
    } catch (const std::invalid_argument& e) {
      throw std::runtime_error("softmax CSV row " + std::to_string(r + 1) +
                               ": " + e.what());
    }
    data.labels.push_back(static_cast<int>(label));
  }
  return data;
}

LabeledSoftmax read_softmax_csv(const std::string& path) {
  return softmax_from_csv(read_text_file(path));
}

std::string scored_to_csv(const ScoredLabels& data) {
  std::ostringstream out;
  out << "score,label\n";
  for (std::size_t i = 0; i < data.scores.size(); ++i) {
    out << format_double(data.scores[i]) << ',' << data.labels[i] << '\n';
  }
  return out.str();
}

ScoredLabels scored_from_csv(const std::string& text) {
  const auto lines = split_lines(text);
  if (lines.size() < 2) {
    throw std::runtime_error(
        "scored CSV needs a header and at least one row");
  }
  ScoredLabels data;
  for (std::size_t r = 1; r < lines.size(); ++r) {
    const auto fields = split_line(lines[r]);
    if (fields.size() != 2) {
      throw std::runtime_error("CSV parse error at row " +
                               std::to_string(r + 1) +
                               ": expected 2 columns");
    }
    data.scores.push_back(parse_double(fields[0], r + 1, 1));
    const double label = parse_double(fields[1], r + 1, 2);
    if (label != 0.0 && label != 1.0) {
      throw std::runtime_error("scored CSV row " + std::to_string(r + 1) +
                               ": label must be 0 or 1");
    }
    data.labels.push_back(static_cast<int>(label));
  }
  return data;
}

ScoredLabels read_scored_csv(const std::string& path) {
  return scored_from_csv(read_text_file(path));
}

}  // namespace oodt
