// Copyright 2026 The qpm Authors
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

#include "qpm/io.hpp"

#include <cmath>
#include <cstdio>
#include <numeric>
#include <ostream>

namespace qpm {

namespace {

constexpr int kProtocolFormatVersion = 1;

int exact_sqrt(int n) {
  const int r = static_cast<int>(std::lround(std::sqrt(static_cast<double>(n))));
  return r * r == n ? r : 0;
}

Json message_label(int c, int alphabet) {
  Json j;
  j["message"] = c;
  if (const int d = exact_sqrt(alphabet); d > 0) j["label"] = {c / d, c % d};
  return j;
}

void expect_kind(const Json& j, const std::string& kind) {
  if (j.value("format", "") != "qpm-protocol") throw ValueError("not a qpm protocol document");
  if (j.value("version", 0) != kProtocolFormatVersion) throw ValueError("unsupported protocol format version");
  if (j.value("kind", "") != kind) throw ValueError("expected a " + kind + " protocol, found " + j.value("kind", "?"));
}

}  // namespace

std::string format_real(double value) {
  if (value == 0.0) return "0";  // folds -0
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.12g", value);
  return buf;
}

double round_real(double value) { return std::stod(format_real(value)); }

Json to_json(const Dims& dims) { return Json(dims.factors()); }

Dims dims_from_json(const Json& j) { return Dims(j.get<std::vector<int>>()); }

Json to_json(const Operator& op) {
  const Matrix& m = op.matrix();
  Json re = Json::array();
  Json im = Json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    Json rr = Json::array();
    Json ri = Json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      rr.push_back(m(r, c).real());
      ri.push_back(m(r, c).imag());
    }
    re.push_back(std::move(rr));
    im.push_back(std::move(ri));
  }
  Json j;
  j["dims"] = to_json(op.dims());
  j["re"] = std::move(re);
  j["im"] = std::move(im);
  return j;
}

Operator operator_from_json(const Json& j) {
  const Dims dims = dims_from_json(j.at("dims"));
  const Json& re = j.at("re");
  const Json& im = j.at("im");
  const int n = dims.total();
  if (static_cast<int>(re.size()) != n || static_cast<int>(im.size()) != n) {
    throw DimensionError("operator rows do not match dims " + dims.str());
  }
  Matrix m(n, n);
  for (int r = 0; r < n; ++r) {
    if (static_cast<int>(re[r].size()) != n || static_cast<int>(im[r].size()) != n) {
      throw DimensionError("operator columns do not match dims " + dims.str());
    }
    for (int c = 0; c < n; ++c) m(r, c) = cd(re[r][c].get<double>(), im[r][c].get<double>());
  }
  return Operator(std::move(m), dims);
}

Json to_json(const ChoiState& choi) {
  Json j;
  j["in_dims"] = to_json(choi.in_dims());
  j["out_dims"] = to_json(choi.out_dims());
  j["choi"] = to_json(choi.matrix());
  return j;
}

ChoiState choi_from_json(const Json& j) {
  return ChoiState(operator_from_json(j.at("choi")), dims_from_json(j.at("in_dims")),
                   dims_from_json(j.at("out_dims")));
}

Json to_json(const ResourceSpec& r) {
  Json j;
  j["message_kind"] = to_string(r.kind);
  j["d_c"] = r.d_c;
  j["d_a"] = r.d_a;
  j["d_b"] = r.d_b;
  j["shared_state"] = to_json(r.shared_state);
  return j;
}

ResourceSpec resource_from_json(const Json& j) {
  const std::string kind = j.at("message_kind").get<std::string>();
  MessageKind k;
  if (kind == to_string(MessageKind::kClassical)) {
    k = MessageKind::kClassical;
  } else if (kind == to_string(MessageKind::kQuantum)) {
    k = MessageKind::kQuantum;
  } else {
    throw ValueError("unknown message kind '" + kind + "'");
  }
  return ResourceSpec(j.at("d_c").get<int>(), operator_from_json(j.at("shared_state")), j.at("d_a").get<int>(),
                      j.at("d_b").get<int>(), k);
}

Json to_json(const ClassicalProtocol& p) {
  Json j;
  j["format"] = "qpm-protocol";
  j["version"] = kProtocolFormatVersion;
  j["kind"] = "classical";
  j["resource"] = to_json(p.resource);
  Json effects = Json::array();
  for (std::size_t c = 0; c < p.encoder.size(); ++c) {
    Json e = message_label(static_cast<int>(c), p.resource.d_c);
    e["effect"] = to_json(p.encoder[c]);
    effects.push_back(std::move(e));
  }
  j["encoder"] = std::move(effects);
  Json decoders = Json::array();
  for (std::size_t c = 0; c < p.decoders.size(); ++c) {
    for (std::size_t y = 0; y < p.decoders[c].size(); ++y) {
      Json e = message_label(static_cast<int>(c), p.resource.d_c);
      e["y"] = y;
      e.update(to_json(p.decoders[c][y]));
      decoders.push_back(std::move(e));
    }
  }
  j["decoders"] = std::move(decoders);
  return j;
}

Json to_json(const QuantumProtocol& p) {
  Json j;
  j["format"] = "qpm-protocol";
  j["version"] = kProtocolFormatVersion;
  j["kind"] = "quantum";
  j["resource"] = to_json(p.resource);
  j["encoder"] = to_json(p.encoder);
  Json decoders = Json::array();
  for (std::size_t y = 0; y < p.decoders.size(); ++y) {
    Json e;
    e["y"] = y;
    e.update(to_json(p.decoders[y]));
    decoders.push_back(std::move(e));
  }
  j["decoders"] = std::move(decoders);
  return j;
}

ClassicalProtocol classical_protocol_from_json(const Json& j) {
  expect_kind(j, "classical");
  ClassicalProtocol p;
  p.resource = resource_from_json(j.at("resource"));
  std::vector<Operator> effects(j.at("encoder").size());
  for (const Json& e : j.at("encoder")) {
    const int c = e.at("message").get<int>();
    if (c < 0 || c >= static_cast<int>(effects.size())) throw ValueError("message index out of range");
    effects[c] = operator_from_json(e.at("effect"));
  }
  p.encoder = Povm(std::move(effects));
  p.decoders.assign(p.encoder.size(), {});
  for (const Json& e : j.at("decoders")) {
    const int c = e.at("message").get<int>();
    const int y = e.at("y").get<int>();
    if (c < 0 || c >= static_cast<int>(p.decoders.size()) || y < 0) throw ValueError("decoder index out of range");
    auto& row = p.decoders[c];
    if (static_cast<int>(row.size()) <= y) row.resize(y + 1);
    row[y] = choi_from_json(e);
  }
  return p;
}

QuantumProtocol quantum_protocol_from_json(const Json& j) {
  expect_kind(j, "quantum");
  QuantumProtocol p;
  p.resource = resource_from_json(j.at("resource"));
  p.encoder = choi_from_json(j.at("encoder"));
  p.decoders.resize(j.at("decoders").size());
  for (const Json& e : j.at("decoders")) {
    const int y = e.at("y").get<int>();
    if (y < 0 || y >= static_cast<int>(p.decoders.size())) throw ValueError("decoder index out of range");
    p.decoders[y] = choi_from_json(e);
  }
  return p;
}

Json to_json(const QuantumRacParts& parts) {
  Json j;
  j["format"] = "qpm-rac";
  j["version"] = kProtocolFormatVersion;
  j["n_inputs"] = parts.n_inputs;
  j["d"] = parts.d;
  j["shared_state"] = to_json(parts.shared_state);
  Json alice = Json::array();
  for (std::size_t x = 0; x < parts.alice.size(); ++x) {
    Json e;
    e["x"] = x;
    e["effects"] = Json::array();
    for (const Operator& op : parts.alice[x].effects()) e["effects"].push_back(to_json(op));
    alice.push_back(std::move(e));
  }
  j["alice"] = std::move(alice);
  Json bob = Json::array();
  for (std::size_t y = 0; y < parts.bob.size(); ++y) {
    for (std::size_t c = 0; c < parts.bob[y].size(); ++c) {
      Json e;
      e["y"] = y;
      e["message"] = c;
      e["effects"] = Json::array();
      for (const Operator& op : parts.bob[y][c].effects()) e["effects"].push_back(to_json(op));
      bob.push_back(std::move(e));
    }
  }
  j["bob"] = std::move(bob);
  return j;
}

std::string format_rational(std::int64_t num, std::int64_t den) {
  if (den == 0) throw ValueError("zero denominator");
  if (den < 0) {
    num = -num;
    den = -den;
  }
  const std::int64_t g = std::gcd(num, den);
  if (g > 1) {
    num /= g;
    den /= g;
  }
  if (den == 1) return std::to_string(num);
  return std::to_string(num) + "/" + std::to_string(den);
}

Json to_json(const NsBox& box) {
  Json rows = Json::array();
  const int q = box.alphabet();
  for (std::int64_t x = 0; x < box.x_count(); ++x) {
    for (int y = 0; y < box.n_inputs(); ++y) {
      for (int a = 0; a < q; ++a) {
        for (int b = 0; b < q; ++b) {
          rows.push_back({{"a", a}, {"b", b}, {"x", x}, {"y", y},
                          {"p", format_rational(box.numerator(a, b, x, y), box.denominator())}});
        }
      }
    }
  }
  Json j;
  j["n_inputs"] = box.n_inputs();
  j["d"] = box.d();
  j["denominator"] = box.denominator();
  j["rows"] = std::move(rows);
  return j;
}

void Table::add(std::vector<Json> row) {
  if (row.size() != columns.size()) throw ValueError("table row has the wrong number of cells");
  rows.push_back(std::move(row));
}

std::string csv_cell(const Json& cell) {
  if (cell.is_number_float()) return format_real(cell.get<double>());
  if (cell.is_number_integer()) return std::to_string(cell.get<std::int64_t>());
  if (cell.is_boolean()) return cell.get<bool>() ? "true" : "false";
  if (cell.is_string()) return cell.get<std::string>();
  return cell.dump();
}

void Table::write_csv(std::ostream& out) const {
  for (std::size_t i = 0; i < columns.size(); ++i) out << (i ? "," : "") << columns[i];
  out << '\n';
  for (const auto& row : rows) {
    for (std::size_t i = 0; i < row.size(); ++i) out << (i ? "," : "") << csv_cell(row[i]);
    out << '\n';
  }
}

Json Table::to_json() const {
  Json arr = Json::array();
  for (const auto& row : rows) {
    Json o = Json::object();
    for (std::size_t i = 0; i < row.size(); ++i) o[columns[i]] = rounded(row[i]);
    arr.push_back(std::move(o));
  }
  return arr;
}

Json rounded(const Json& j) {
  if (j.is_number_float()) return round_real(j.get<double>());
  if (j.is_array() || j.is_object()) {
    Json out = j;
    for (auto& v : out) v = rounded(v);
    return out;
  }
  return j;
}

}  // namespace qpm
