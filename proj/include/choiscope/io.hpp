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


// JSON file format for channels and states, with a canonical serializer.
//
//   {"data": ..., "dims": [a, b], "format_version": "1", "kind": "..."}
//
// kind "kraus": data is a list of d_out x d_in matrices, dims = [d_in, d_out].
// kind "liouville" / "choi": data is one matrix, dims = [d_in, d_out].
// kind "state": data is one matrix on the composite, dims = [d_A, d_B].
// Matrices are row-major nested arrays whose entries are [re, im] pairs.

#ifndef CHOISCOPE_IO_HPP_
#define CHOISCOPE_IO_HPP_

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "choiscope/channels.hpp"
#include "choiscope/numerics.hpp"

namespace choiscope {

inline constexpr std::string_view kFormatVersion = "1";

enum class FileKind { kKraus, kLiouville, kChoi, kState };

std::string_view to_string(FileKind kind);

struct ChannelFile {
  FileKind kind = FileKind::kState;
  std::size_t dim0 = 0;  // d_in, or d_A for states
  std::size_t dim1 = 0;  // d_out, or d_B for states
  std::vector<ComplexMatrix> data;
};

// Compact JSON with sorted keys, doubles printed with 17 significant digits
// and negative zero written as 0.
std::string canonical_dump(const nlohmann::json& value);

// Throws ParseError (message carries line and column) on malformed JSON or
// schema violations, DimensionMismatch when data disagrees with dims.
ChannelFile parse_channel_file(std::string_view text);
std::string serialize_channel_file(const ChannelFile& file);

nlohmann::json matrix_to_json(const ComplexMatrix& m);
nlohmann::json vector_to_json(const ComplexVector& v);

Channel to_channel(const ChannelFile& file);
// Kraus requires the channel to carry Kraus operators (CP maps).
ChannelFile channel_file(const Channel& phi, FileKind kind, Tolerance tol = {});
ChannelFile state_file(const ComplexMatrix& rho, std::size_t d_a, std::size_t d_b);

// 64-bit FNV-1a digest, as 16 lowercase hex digits.
std::string fnv1a_hex(std::string_view bytes);

}  // namespace choiscope

#endif  // CHOISCOPE_IO_HPP_
