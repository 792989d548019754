// Copyright 2026 The choiscope Authors
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


#include "choiscope/io.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <set>

#include "choiscope/error.hpp"

namespace choiscope {
namespace {

using nlohmann::json;

[[noreturn]] void schema_error(const std::string& what) {
  throw Error(ErrorKind::kParseError, what);
}

void dump_into(const json& v, std::string& out) {
  switch (v.type()) {
    case json::value_t::object: {
      out += '{';
      bool first = true;
      for (auto it = v.begin(); it != v.end(); ++it) {  // object_t is an ordered map
        if (!first) out += ',';
        first = false;
        out += json(it.key()).dump();
        out += ':';
        dump_into(it.value(), out);
      }
      out += '}';
      break;
    }
    case json::value_t::array: {
      out += '[';
      for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) out += ',';
        dump_into(v[i], out);
      }
      out += ']';
      break;
    }
    case json::value_t::number_float: {
      const double x = v.get<double>();
      if (!std::isfinite(x)) throw Error(ErrorKind::kNonFinite, "cannot serialize a non-finite number");
      if (x == 0.0) {
        out += '0';
        break;
      }
      char buf[40];
      const auto res = std::to_chars(buf, buf + sizeof buf, x, std::chars_format::general, 17);
      out.append(buf, res.ptr);
      break;
    }
    default:
      out += v.dump();
  }
}

double number(const json& v, const std::string& where) {
  if (!v.is_number()) schema_error(where + ": expected a number");
  return v.get<double>();
}

ComplexMatrix parse_matrix(const json& v, const std::string& where) {
  if (!v.is_array() || v.empty()) schema_error(where + ": expected a nonempty array of rows");
  const std::size_t rows = v.size();
  if (!v[0].is_array() || v[0].empty()) schema_error(where + "[0]: expected a nonempty row");
  const std::size_t cols = v[0].size();
  ComplexMatrix m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  for (std::size_t i = 0; i < rows; ++i) {
    const std::string row_at = where + "[" + std::to_string(i) + "]";
    if (!v[i].is_array() || v[i].size() != cols) schema_error(row_at + ": rows must have equal length");
    for (std::size_t j = 0; j < cols; ++j) {
      const json& z = v[i][j];
      const std::string at = row_at + "[" + std::to_string(j) + "]";
      if (!z.is_array() || z.size() != 2) schema_error(at + ": expected [re, im]");
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
          Complex(number(z[0], at), number(z[1], at));
    }
  }
  if (!all_finite(m)) throw Error(ErrorKind::kNonFinite, where + ": non-finite entry");
  return m;
}

std::size_t positive_dim(const json& v, const std::string& where) {
  if (!v.is_number_integer() || v.get<long long>() <= 0) {
    schema_error(where + ": expected a positive integer");
  }
  return static_cast<std::size_t>(v.get<long long>());
}

void require_shape(const ComplexMatrix& m, std::size_t rows, std::size_t cols,
                   const std::string& what) {
  if (static_cast<std::size_t>(m.rows()) != rows || static_cast<std::size_t>(m.cols()) != cols) {
    throw Error(ErrorKind::kDimensionMismatch,
                what + " is " + std::to_string(m.rows()) + "x" + std::to_string(m.cols()) +
                    ", dims require " + std::to_string(rows) + "x" + std::to_string(cols));
  }
}

}  // namespace

std::string_view to_string(FileKind kind) {
  switch (kind) {
    case FileKind::kKraus: return "kraus";
    case FileKind::kLiouville: return "liouville";
    case FileKind::kChoi: return "choi";
    case FileKind::kState: return "state";
  }
  return "unknown";
}

std::string canonical_dump(const json& value) {
  std::string out;
  dump_into(value, out);
  return out;
}

json matrix_to_json(const ComplexMatrix& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back({m(i, j).real(), m(i, j).imag()});
    rows.push_back(std::move(row));
  }
  return rows;
}

json vector_to_json(const ComplexVector& v) {
  json out = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back({v(i).real(), v(i).imag()});
  return out;
}

ChannelFile parse_channel_file(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    // e.what() already reports "at line L, column C".
    throw Error(ErrorKind::kParseError, std::string(e.what()) + " (byte " + std::to_string(e.byte) + ")");
  }
  if (!doc.is_object()) schema_error("top level must be an object");
  static const std::set<std::string> kKeys = {"data", "dims", "format_version", "kind"};
  for (auto it = doc.begin(); it != doc.end(); ++it) {
    if (!kKeys.count(it.key())) schema_error("unknown key '" + it.key() + "'");
  }
  for (const auto& k : kKeys) {
    if (!doc.contains(k)) schema_error("missing key '" + k + "'");
  }
  if (!doc["format_version"].is_string() || doc["format_version"].get<std::string>() != kFormatVersion) {
    schema_error("format_version must be \"" + std::string(kFormatVersion) + "\"");
  }
  if (!doc["kind"].is_string()) schema_error("kind must be a string");
  const std::string kind = doc["kind"].get<std::string>();
  ChannelFile file;
  if (kind == "kraus") file.kind = FileKind::kKraus;
  else if (kind == "liouville") file.kind = FileKind::kLiouville;
  else if (kind == "choi") file.kind = FileKind::kChoi;
  else if (kind == "state") file.kind = FileKind::kState;
  else schema_error("unknown kind '" + kind + "'");

  const json& dims = doc["dims"];
  if (!dims.is_array() || dims.size() != 2) schema_error("dims must be a two-element array");
  file.dim0 = positive_dim(dims[0], "dims[0]");
  file.dim1 = positive_dim(dims[1], "dims[1]");
  const std::size_t a = file.dim0, b = file.dim1;

  const json& data = doc["data"];
  if (file.kind == FileKind::kKraus) {
    if (!data.is_array() || data.empty()) schema_error("data: expected a nonempty list of matrices");
    for (std::size_t k = 0; k < data.size(); ++k) {
      const std::string at = "data[" + std::to_string(k) + "]";
      file.data.push_back(parse_matrix(data[k], at));
      require_shape(file.data.back(), b, a, at);
    }
  } else {
    file.data.push_back(parse_matrix(data, "data"));
    if (file.kind == FileKind::kLiouville) require_shape(file.data[0], b * b, a * a, "data");
    else require_shape(file.data[0], a * b, a * b, "data");
  }
  return file;
}

std::string serialize_channel_file(const ChannelFile& file) {
  json doc;
  doc["format_version"] = std::string(kFormatVersion);
  doc["kind"] = std::string(to_string(file.kind));
  doc["dims"] = {file.dim0, file.dim1};
  if (file.kind == FileKind::kKraus) {
    json list = json::array();
    for (const auto& m : file.data) list.push_back(matrix_to_json(m));
    doc["data"] = std::move(list);
  } else {
    if (file.data.size() != 1) throw Error(ErrorKind::kInvalidArgument, "expected exactly one matrix");
    doc["data"] = matrix_to_json(file.data[0]);
  }
  return canonical_dump(doc) + "\n";
}

Channel to_channel(const ChannelFile& file) {
  switch (file.kind) {
    case FileKind::kKraus: return Channel::from_kraus(KrausSet::make(file.data));
    case FileKind::kLiouville:
      return Channel::from_liouville(LiouvilleMatrix::make(file.data[0], file.dim0, file.dim1));
    case FileKind::kChoi:
      return Channel::from_choi(ChoiMatrix::make(file.data[0], file.dim0, file.dim1));
    case FileKind::kState: break;
  }
  throw Error(ErrorKind::kInvalidArgument, "file holds a state, not a channel");
}

ChannelFile channel_file(const Channel& phi, FileKind kind, Tolerance tol) {
  ChannelFile file;
  file.kind = kind;
  file.dim0 = phi.d_in();
  file.dim1 = phi.d_out();
  switch (kind) {
    case FileKind::kKraus:
      file.data = phi.kraus() ? phi.kraus()->operators : choi_to_kraus(phi.choi(), tol).operators;
      break;
    case FileKind::kLiouville: file.data = {phi.liouville().matrix}; break;
    case FileKind::kChoi: file.data = {phi.choi().matrix}; break;
    case FileKind::kState:
      throw Error(ErrorKind::kInvalidArgument, "a channel cannot be written as a state");
  }
  return file;
}

ChannelFile state_file(const ComplexMatrix& rho, std::size_t d_a, std::size_t d_b) {
  ChannelFile file;
  file.kind = FileKind::kState;
  file.dim0 = d_a;
  file.dim1 = d_b;
  file.data = {rho};
  require_shape(rho, d_a * d_b, d_a * d_b, "state");
  return file;
}

std::string fnv1a_hex(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : bytes) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace choiscope
