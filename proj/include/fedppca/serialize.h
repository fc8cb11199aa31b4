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

#ifndef FEDPPCA_SERIALIZE_H_
#define FEDPPCA_SERIALIZE_H_

#include <cstdint>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "fedppca/layout.h"
#include "fedppca/params.h"

namespace fedppca {

inline constexpr char kWireMagic[4] = {'F', 'M', 'V', 'P'};
inline constexpr uint8_t kWireVersion = 1;

using Bytes = std::vector<uint8_t>;
using AnyParams = std::variant<LocalParams, GlobalParams>;

// Layout: magic, version u8, layout digest u64, kind u8 (0 local, 1 global),
// q u32, view count u32, then per view a u32-length-prefixed name, d_k u32, a
// present flag u8 and, when present, mu, W row-major and either sigma2 or
// (sigma2_mu_tilde, sigma2_w_tilde, alpha, beta). Integers and doubles are
// little-endian. A trailing FNV-1a 64 checksum covers everything before it.
Bytes SerializeParams(const LocalParams& params, const ViewLayout& layout);
Bytes SerializeParams(const GlobalParams& params, const ViewLayout& layout);

struct DecodedParams {
  ViewLayout layout;
  AnyParams params;
};

// Raises kBadMagic, kFormatVersionMismatch, kTruncatedMessage or
// kChecksumFailure.
DecodedParams DeserializeParams(std::span<const uint8_t> bytes);

void WriteBytesFile(const std::string& path, const Bytes& bytes);
Bytes ReadBytesFile(const std::string& path);

}  // namespace fedppca

#endif  // FEDPPCA_SERIALIZE_H_
