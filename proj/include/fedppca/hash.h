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

#ifndef FEDPPCA_HASH_H_
#define FEDPPCA_HASH_H_

#include <cstddef>
#include <cstdint>

namespace fedppca {

// 64-bit FNV-1a, fed byte-wise with explicit little-endian integer encoding.
class Fnv1a64 {
 public:
  void AddBytes(const void* data, size_t n) {
    const auto* p = static_cast<const unsigned char*>(data);
    for (size_t i = 0; i < n; ++i) {
      state_ ^= p[i];
      state_ *= 0x100000001b3ULL;
    }
  }
  void AddU32(uint32_t v) {
    for (int i = 0; i < 4; ++i) AddByte(static_cast<unsigned char>(v >> (8 * i)));
  }
  void AddU64(uint64_t v) {
    for (int i = 0; i < 8; ++i) AddByte(static_cast<unsigned char>(v >> (8 * i)));
  }
  uint64_t value() const { return state_; }

 private:
  void AddByte(unsigned char b) {
    state_ ^= b;
    state_ *= 0x100000001b3ULL;
  }
  uint64_t state_ = 0xcbf29ce484222325ULL;
};

}  // namespace fedppca

#endif  // FEDPPCA_HASH_H_
