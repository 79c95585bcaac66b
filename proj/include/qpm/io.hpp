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

#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "json.hpp"
#include "qpm/protocols.hpp"
#include "qpm/scenario.hpp"

namespace qpm {

using Json = nlohmann::ordered_json;

/// 12 significant digits, shortest form.
std::string format_real(double value);
/// value rounded to 12 significant digits.
double round_real(double value);

Json to_json(const Dims& dims);
Dims dims_from_json(const Json& j);
/// {"dims": [...], "re": [[...]], "im": [[...]]}
Json to_json(const Operator& op);
Operator operator_from_json(const Json& j);
Json to_json(const ChoiState& choi);
ChoiState choi_from_json(const Json& j);
Json to_json(const ResourceSpec& r);
ResourceSpec resource_from_json(const Json& j);

/// Messages carry their index and, when the alphabet is a square d^2, the pair
/// (u, v) with index = u d + v.
Json to_json(const ClassicalProtocol& p);
Json to_json(const QuantumProtocol& p);
ClassicalProtocol classical_protocol_from_json(const Json& j);
QuantumProtocol quantum_protocol_from_json(const Json& j);

/// Shared state, Alice's POVMs by x and Bob's by (y, c).
Json to_json(const QuantumRacParts& parts);

/// "num/den" in lowest terms ("0", "1" and integers without a slash).
std::string format_rational(std::int64_t num, std::int64_t den);

/// Rows (a, b, x, y, p); x is the packed string index.
Json to_json(const NsBox& box);

/// Result table with fixed column order. Cells are numbers, integers or strings.
struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<Json>> rows;

  void add(std::vector<Json> row);
  void write_csv(std::ostream& out) const;
  /// Array of objects keyed by column name.
  Json to_json() const;
};

/// CSV cell text: integers as-is, reals via format_real, strings verbatim.
std::string csv_cell(const Json& cell);
/// Rounds every floating-point number in a document to 12 significant digits.
Json rounded(const Json& j);

}  // namespace qpm
