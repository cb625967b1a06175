// Copyright 2026 The consmatch Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "consmatch/io.hpp"

#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <set>

#include "consmatch/error.hpp"
#include "json.hpp"

namespace consmatch {
namespace {

using nlohmann::json;

[[noreturn]] void ParseFailure(const std::string& what) {
  throw Error(ErrorCode::kParse, what);
}

json ReadDocument(std::istream& in, const char* expected_format) {
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    ParseFailure(std::string("malformed JSON: ") + e.what());
  }
  if (!doc.is_object()) ParseFailure("document is not a JSON object");
  if (doc.value("format", std::string()) != expected_format) {
    ParseFailure(std::string("expected format \"") + expected_format + "\"");
  }
  if (doc.value("version", 0) != kFormatVersion) {
    ParseFailure("unsupported format version");
  }
  return doc;
}

// Wraps nlohmann type errors so every malformed field surfaces as kParse.
template <typename Fn>
auto Guarded(const std::string& context, Fn&& fn) {
  try {
    return fn();
  } catch (const json::exception& e) {
    ParseFailure(context + ": " + e.what());
  }
}

json RowMajor(const Eigen::MatrixXd& m) {
  json values = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) values.push_back(m(r, c));
  }
  return values;
}

Eigen::MatrixXd FromRowMajor(const json& values, Eigen::Index rows,
                             Eigen::Index cols, const std::string& context) {
  if (!values.is_array() ||
      values.size() != static_cast<size_t>(rows * cols)) {
    ParseFailure(context + ": expected " + std::to_string(rows * cols) +
                 " values");
  }
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    for (Eigen::Index c = 0; c < cols; ++c) {
      m(r, c) = values[r * cols + c].get<double>();
    }
  }
  return m;
}

std::vector<std::pair<int, int>> ReadPairs(const json& list,
                                           const std::string& context) {
  if (!list.is_array()) ParseFailure(context + ": expected a list of pairs");
  std::vector<std::pair<int, int>> out;
  for (const json& item : list) {
    if (!item.is_array() || item.size() != 2) {
      ParseFailure(context + ": expected [candidate, label] pairs");
    }
    out.emplace_back(item[0].get<int>(), item[1].get<int>());
  }
  return out;
}

std::string ImageId(std::span<const std::string> ids, int i) {
  if (i < static_cast<int>(ids.size())) return ids[i];
  return "image_" + std::to_string(i);
}

}  // namespace

void apply_defaults(const SolverDefaults& defaults, SolverConfig& config) {
  if (defaults.k) config.k = *defaults.k;
  if (defaults.rank) config.rank = *defaults.rank;
  if (defaults.lambda) config.lambda = *defaults.lambda;
  if (defaults.rho_schedule) config.rho_schedule = *defaults.rho_schedule;
}

ProblemDocument parse_problem(std::istream& in) {
  const json doc = ReadDocument(in, "consmatch-problem");
  ProblemDocument out;
  Guarded("images", [&] {
    const json& images = doc.at("images");
    if (!images.is_array() || images.empty()) ParseFailure("no images");
    for (const json& image : images) {
      FeatureSet f;
      f.image_id = image.at("id").get<std::string>();
      const int p = image.at("num_candidates").get<int>();
      if (p < 1) ParseFailure("image " + f.image_id + " has no candidates");
      f.coordinates = FromRowMajor(image.at("coordinates"), 2, p,
                                   "coordinates of " + f.image_id);
      if (image.contains("descriptors")) {
        const json& d = image.at("descriptors");
        const int dim = d.at("dim").get<int>();
        if (dim < 1) ParseFailure("descriptor dimension must be positive");
        f.descriptors = FromRowMajor(d.at("values"), dim, p,
                                     "descriptors of " + f.image_id);
      }
      out.features.push_back(std::move(f));
    }
    return 0;
  });

  Guarded("blocks", [&] {
    const int n = static_cast<int>(out.features.size());
    for (const json& entry : doc.value("blocks", json::array())) {
      if (!entry.is_array() || entry.size() != 5) {
        ParseFailure("block entries are [i, j, row, col, value]");
      }
      const int i = entry[0].get<int>(), j = entry[1].get<int>();
      const int row = entry[2].get<int>(), col = entry[3].get<int>();
      if (i < 0 || i >= n || j < 0 || j >= n) {
        ParseFailure("block entry references a missing image");
      }
      const int p_i = out.features[i].size(), p_j = out.features[j].size();
      if (row < 0 || row >= p_i || col < 0 || col >= p_j) {
        ParseFailure("block entry (" + std::to_string(i) + "," +
                     std::to_string(j) + ") index out of range");
      }
      auto [it, inserted] = out.scores.blocks.try_emplace(
          {i, j}, Eigen::MatrixXd::Zero(p_i, p_j));
      it->second(row, col) = entry[4].get<double>();
    }
    return 0;
  });

  Guarded("solver", [&] {
    if (!doc.contains("solver")) return 0;
    const json& s = doc.at("solver");
    if (s.contains("k")) out.defaults.k = s.at("k").get<int>();
    if (s.contains("rank")) out.defaults.rank = s.at("rank").get<int>();
    if (s.contains("lambda")) out.defaults.lambda = s.at("lambda").get<double>();
    if (s.contains("rho")) {
      out.defaults.rho_schedule = s.at("rho").get<std::vector<double>>();
    }
    return 0;
  });
  return out;
}

void write_problem(std::ostream& out, const ProblemDocument& doc) {
  json j;
  j["format"] = "consmatch-problem";
  j["version"] = kFormatVersion;
  j["images"] = json::array();
  for (const FeatureSet& f : doc.features) {
    json image;
    image["id"] = f.image_id;
    image["num_candidates"] = f.size();
    image["coordinates"] = RowMajor(f.coordinates);
    if (f.descriptors) {
      image["descriptors"] = {{"dim", f.descriptors->rows()},
                              {"values", RowMajor(*f.descriptors)}};
    }
    j["images"].push_back(std::move(image));
  }
  j["blocks"] = json::array();
  for (const auto& [key, block] : doc.scores.blocks) {
    for (Eigen::Index r = 0; r < block.rows(); ++r) {
      for (Eigen::Index c = 0; c < block.cols(); ++c) {
        if (block(r, c) != 0.0) {
          j["blocks"].push_back({key.first, key.second, r, c, block(r, c)});
        }
      }
    }
  }
  json solver = json::object();
  if (doc.defaults.k) solver["k"] = *doc.defaults.k;
  if (doc.defaults.rank) solver["rank"] = *doc.defaults.rank;
  if (doc.defaults.lambda) solver["lambda"] = *doc.defaults.lambda;
  if (doc.defaults.rho_schedule) solver["rho"] = *doc.defaults.rho_schedule;
  if (!solver.empty()) j["solver"] = std::move(solver);
  out << j.dump(1) << '\n';
}

GroundTruth parse_truth(std::istream& in) {
  const json doc = ReadDocument(in, "consmatch-truth");
  GroundTruth truth;
  Guarded("truth", [&] {
    const json& images = doc.at("images");
    if (!images.is_array() || images.empty()) ParseFailure("no images");
    for (const json& image : images) {
      const auto pairs = ReadPairs(image.at("correspondences"), "truth");
      std::vector<int> labels(pairs.size(), -2);
      for (const auto& [candidate, label] : pairs) {
        if (candidate < 0 || candidate >= static_cast<int>(pairs.size()) ||
            labels[candidate] != -2 || label < -1) {
          ParseFailure("truth must list every candidate exactly once");
        }
        labels[candidate] = label;
      }
      for (int label : labels) {
        if (label == -2) ParseFailure("truth must list every candidate");
      }
      truth.labels.push_back(std::move(labels));
    }
    return 0;
  });
  return truth;
}

void write_truth(std::ostream& out, const GroundTruth& truth,
                 std::span<const std::string> image_ids) {
  json j;
  j["format"] = "consmatch-truth";
  j["version"] = kFormatVersion;
  j["images"] = json::array();
  for (int i = 0; i < truth.num_images(); ++i) {
    json pairs = json::array();
    for (size_t c = 0; c < truth.labels[i].size(); ++c) {
      pairs.push_back({c, truth.labels[i][c]});
    }
    j["images"].push_back(
        {{"id", ImageId(image_ids, i)}, {"correspondences", std::move(pairs)}});
  }
  out << j.dump(1) << '\n';
}

SelectionLabeling parse_labeling(std::istream& in) {
  const json doc = ReadDocument(in, "consmatch-labeling");
  SelectionLabeling x;
  Guarded("labeling", [&] {
    x.k = doc.at("k").get<int>();
    if (x.k < 1) ParseFailure("labeling k must be positive");
    const json& images = doc.at("images");
    if (!images.is_array() || images.empty()) ParseFailure("no images");
    for (const json& image : images) {
      std::vector<int> selected(x.k, -1);
      for (const auto& [candidate, label] :
           ReadPairs(image.at("selected"), "labeling")) {
        if (label < 0 || label >= x.k || selected[label] != -1 || candidate < 0) {
          ParseFailure("labeling pairs must cover each label once");
        }
        selected[label] = candidate;
      }
      for (int c : selected) {
        if (c < 0) ParseFailure("labeling leaves a label unassigned");
      }
      x.selected.push_back(std::move(selected));
    }
    return 0;
  });
  return x;
}

void write_labeling(std::ostream& out, const SelectionLabeling& labeling,
                    std::span<const std::string> image_ids) {
  json j;
  j["format"] = "consmatch-labeling";
  j["version"] = kFormatVersion;
  j["k"] = labeling.k;
  j["images"] = json::array();
  for (int i = 0; i < labeling.num_images(); ++i) {
    json pairs = json::array();
    for (int label = 0; label < labeling.k; ++label) {
      pairs.push_back({labeling.selected[i][label], label});
    }
    j["images"].push_back(
        {{"id", ImageId(image_ids, i)}, {"selected", std::move(pairs)}});
  }
  out << j.dump(1) << '\n';
}

void write_trace(std::ostream& out, const std::vector<TraceRecord>& trace) {
  out << "stage,iteration,rho,cycle,geo,coupling,total\n";
  char line[256];
  for (const TraceRecord& r : trace) {
    std::snprintf(line, sizeof(line), "%d,%d,%.17g,%.17g,%.17g,%.17g,%.17g\n",
                  r.stage, r.iteration, r.rho, r.terms.cycle, r.terms.geo,
                  r.terms.coupling, r.terms.total);
    out << line;
  }
}

void write_point_cloud(std::ostream& out, const Eigen::Matrix3Xd& shape) {
  out << "# label x y z\n";
  char line[128];
  for (Eigen::Index l = 0; l < shape.cols(); ++l) {
    std::snprintf(line, sizeof(line), "%ld %.17g %.17g %.17g\n",
                  static_cast<long>(l), shape(0, l), shape(1, l), shape(2, l));
    out << line;
  }
}

namespace {

std::ifstream OpenInput(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + path);
  return in;
}

}  // namespace

ProblemDocument read_problem_file(const std::string& path) {
  std::ifstream in = OpenInput(path);
  return parse_problem(in);
}

void write_problem_file(const std::string& path, const ProblemDocument& doc) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + path);
  write_problem(out, doc);
  if (!out) throw Error(ErrorCode::kIo, "failed writing " + path);
}

GroundTruth read_truth_file(const std::string& path) {
  std::ifstream in = OpenInput(path);
  return parse_truth(in);
}

SelectionLabeling read_labeling_file(const std::string& path) {
  std::ifstream in = OpenInput(path);
  return parse_labeling(in);
}

}  // namespace consmatch
