// Copyright 2026 The fedppca Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include "fedppca/data.h"
#include "fedppca/error.h"

namespace fedppca {
namespace {

std::vector<std::string> SplitLine(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream in(line);
  while (std::getline(in, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

std::string Trim(std::string s) {
  while (!s.empty() && (s.back() == '\r' || s.back() == ' ')) s.pop_back();
  size_t start = 0;
  while (start < s.size() && s[start] == ' ') ++start;
  return s.substr(start);
}

struct ViewColumns {
  std::string name;
  std::vector<int> columns;
};

}  // namespace

CenterDataset ParseTabular(const std::string& text, const ViewLayout* expected) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) {
    throw DataError(ErrorCode::kHeaderMismatch, -1, "", "empty file");
  }
  std::vector<std::string> header = SplitLine(line);
  for (std::string& h : header) h = Trim(h);

  int id_col = -1, group_col = -1;
  std::vector<ViewColumns> found;
  for (int c = 0; c < static_cast<int>(header.size()); ++c) {
    const std::string& h = header[c];
    if (h == "id") { id_col = c; continue; }
    if (h == "group") { group_col = c; continue; }
    const size_t dot = h.find('.');
    if (dot == std::string::npos || dot == 0 || dot + 1 == h.size()) {
      throw DataError(ErrorCode::kHeaderMismatch, -1, h,
                      "column is not of the form view.feature");
    }
    const std::string view = h.substr(0, dot);
    if (found.empty() || found.back().name != view) {
      for (const ViewColumns& v : found) {
        if (v.name == view) {
          throw DataError(ErrorCode::kHeaderMismatch, -1, h,
                          "columns of view '" + view + "' are not contiguous");
        }
      }
      found.push_back({view, {}});
    }
    found.back().columns.push_back(c);
  }

  std::vector<ViewSpec> specs;
  std::vector<int> source(found.size());
  if (expected == nullptr) {
    for (size_t v = 0; v < found.size(); ++v) {
      specs.push_back({found[v].name, static_cast<int>(found[v].columns.size())});
      source[v] = static_cast<int>(v);
    }
  } else {
    specs = expected->views();
  }
  if (specs.empty()) {
    throw DataError(ErrorCode::kHeaderMismatch, -1, "", "no view columns");
  }
  ViewLayout layout(specs);
  // view index -> entry of `found`, or -1 when the view is missing.
  std::vector<int> view_source(layout.num_views(), -1);
  for (size_t v = 0; v < found.size(); ++v) {
    int k = -1;
    for (int j = 0; j < layout.num_views(); ++j) {
      if (layout.name(j) == found[v].name) k = j;
    }
    if (k < 0) {
      throw DataError(ErrorCode::kHeaderMismatch, -1, found[v].name,
                      "view not in the expected layout");
    }
    if (static_cast<int>(found[v].columns.size()) != layout.dim(k)) {
      throw DataError(ErrorCode::kHeaderMismatch, -1, found[v].name,
                      "expected " + std::to_string(layout.dim(k)) + " columns, got " +
                          std::to_string(found[v].columns.size()));
    }
    view_source[k] = static_cast<int>(v);
  }

  CenterDataset data(layout);
  std::vector<std::vector<double>> values(layout.num_views());
  long row = 0;
  while (std::getline(in, line)) {
    if (Trim(line).empty()) continue;
    const std::vector<std::string> cells = SplitLine(line);
    if (cells.size() != header.size()) {
      throw DataError(ErrorCode::kRaggedRow, row, "",
                      "row has " + std::to_string(cells.size()) + " cells, header " +
                          std::to_string(header.size()));
    }
    data.ids.push_back(id_col >= 0 ? Trim(cells[id_col]) : "row" + std::to_string(row));
    int group = kGroup1;
    if (group_col >= 0) {
      const std::string g = Trim(cells[group_col]);
      if (g == "g1") group = kGroup1;
      else if (g == "g2") group = kGroup2;
      else throw DataError(ErrorCode::kNonNumericCell, row, "group",
                           "group label '" + g + "' is neither g1 nor g2");
    }
    data.groups.push_back(group);
    for (int k = 0; k < layout.num_views(); ++k) {
      if (view_source[k] < 0) continue;
      for (int c : found[view_source[k]].columns) {
        const std::string cell = Trim(cells[c]);
        double value = 0.0;
        const auto [end, ec] =
            std::from_chars(cell.data(), cell.data() + cell.size(), value);
        if (cell.empty() || ec != std::errc() || end != cell.data() + cell.size() ||
            !std::isfinite(value)) {
          throw DataError(ErrorCode::kNonNumericCell, row, header[c],
                          "cannot parse '" + cell + "'");
        }
        values[k].push_back(value);
      }
    }
    ++row;
  }
  for (int k = 0; k < layout.num_views(); ++k) {
    if (view_source[k] < 0) continue;
    const int d = layout.dim(k);
    Eigen::MatrixXd block(row, d);
    for (long r = 0; r < row; ++r) {
      for (int j = 0; j < d; ++j) block(r, j) = values[k][r * d + j];
    }
    data.views[k] = std::move(block);
  }
  return data;
}

CenterDataset LoadTabular(const std::string& path, const ViewLayout* expected) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIoError, "cannot open '" + path + "'");
  std::ostringstream text;
  text << in.rdbuf();
  return ParseTabular(text.str(), expected);
}

std::string FormatTabular(const CenterDataset& data) {
  std::ostringstream out;
  out << "id,group";
  for (int k : data.present_views()) {
    for (int j = 0; j < data.layout.dim(k); ++j) {
      out << ',' << data.layout.name(k) << ".f" << (j + 1);
    }
  }
  out << '\n';
  char buf[32];
  for (int n = 0; n < data.size(); ++n) {
    out << data.ids[n] << ',' << GroupName(data.groups[n]);
    for (int k : data.present_views()) {
      for (int j = 0; j < data.layout.dim(k); ++j) {
        std::snprintf(buf, sizeof(buf), "%.17g", (*data.views[k])(n, j));
        out << ',' << buf;
      }
    }
    out << '\n';
  }
  return out.str();
}

void WriteTabular(const std::string& path, const CenterDataset& data) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::kIoError, "cannot open '" + path + "'");
  out << FormatTabular(data);
  if (!out) throw Error(ErrorCode::kIoError, "cannot write '" + path + "'");
}

}  // namespace fedppca
