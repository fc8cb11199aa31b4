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

#include "fedppca/serialize.h"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>

#include "fedppca/error.h"
#include "fedppca/hash.h"

namespace fedppca {
namespace {

enum Kind : uint8_t { kLocalKind = 0, kGlobalKind = 1 };

class Writer {
 public:
  void U8(uint8_t v) { out_.push_back(v); }
  void U32(uint32_t v) {
    for (int i = 0; i < 4; ++i) out_.push_back(static_cast<uint8_t>(v >> (8 * i)));
  }
  void U64(uint64_t v) {
    for (int i = 0; i < 8; ++i) out_.push_back(static_cast<uint8_t>(v >> (8 * i)));
  }
  void F64(double v) { U64(std::bit_cast<uint64_t>(v)); }
  void Str(const std::string& s) {
    U32(static_cast<uint32_t>(s.size()));
    out_.insert(out_.end(), s.begin(), s.end());
  }
  void Vec(const Eigen::VectorXd& v) {
    for (Eigen::Index i = 0; i < v.size(); ++i) F64(v(i));
  }
  void Mat(const Eigen::MatrixXd& m) {
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
      for (Eigen::Index c = 0; c < m.cols(); ++c) F64(m(r, c));
    }
  }
  Bytes Finish() {
    Fnv1a64 h;
    h.AddBytes(out_.data(), out_.size());
    U64(h.value());
    return std::move(out_);
  }

 private:
  Bytes out_;
};

class Reader {
 public:
  explicit Reader(std::span<const uint8_t> data) : data_(data) {}

  uint8_t U8() { return Take(1)[0]; }
  uint32_t U32() {
    const uint8_t* p = Take(4);
    uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<uint32_t>(p[i]) << (8 * i);
    return v;
  }
  uint64_t U64() {
    const uint8_t* p = Take(8);
    uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<uint64_t>(p[i]) << (8 * i);
    return v;
  }
  double F64() { return std::bit_cast<double>(U64()); }
  std::string Str() {
    const uint32_t n = U32();
    const uint8_t* p = Take(n);
    return std::string(reinterpret_cast<const char*>(p), n);
  }
  Eigen::VectorXd Vec(int n) {
    Need(static_cast<size_t>(n) * 8);
    Eigen::VectorXd v(n);
    for (int i = 0; i < n; ++i) v(i) = F64();
    return v;
  }
  Eigen::MatrixXd Mat(int rows, int cols) {
    Need(static_cast<size_t>(rows) * static_cast<size_t>(cols) * 8);
    Eigen::MatrixXd m(rows, cols);
    for (int r = 0; r < rows; ++r) {
      for (int c = 0; c < cols; ++c) m(r, c) = F64();
    }
    return m;
  }
  size_t position() const { return pos_; }

 private:
  void Need(size_t n) const {
    if (n > data_.size() - pos_) {
      throw Error(ErrorCode::kTruncatedMessage, "message ends early");
    }
  }
  const uint8_t* Take(size_t n) {
    Need(n);
    const uint8_t* p = data_.data() + pos_;
    pos_ += n;
    return p;
  }

  std::span<const uint8_t> data_;
  size_t pos_ = 0;
};

void WriteHeader(Writer& w, const ViewLayout& layout, Kind kind, int q) {
  for (char c : kWireMagic) w.U8(static_cast<uint8_t>(c));
  w.U8(kWireVersion);
  w.U64(layout.digest());
  w.U8(kind);
  w.U32(static_cast<uint32_t>(q));
  w.U32(static_cast<uint32_t>(layout.num_views()));
}

}  // namespace

Bytes SerializeParams(const LocalParams& params, const ViewLayout& layout) {
  params.Validate(layout);
  Writer w;
  WriteHeader(w, layout, kLocalKind, params.latent_dim);
  for (int k = 0; k < layout.num_views(); ++k) {
    w.Str(layout.name(k));
    w.U32(static_cast<uint32_t>(layout.dim(k)));
    w.U8(params.has_view(k) ? 1 : 0);
    if (!params.has_view(k)) continue;
    const ViewParams& v = params.view(k);
    w.Vec(v.mu);
    w.Mat(v.w);
    w.F64(v.sigma2);
  }
  return w.Finish();
}

Bytes SerializeParams(const GlobalParams& params, const ViewLayout& layout) {
  params.Validate(layout);
  Writer w;
  WriteHeader(w, layout, kGlobalKind, params.latent_dim);
  for (int k = 0; k < layout.num_views(); ++k) {
    w.Str(layout.name(k));
    w.U32(static_cast<uint32_t>(layout.dim(k)));
    w.U8(1);
    const GlobalViewParams& g = params.views[k];
    w.Vec(g.mu_tilde);
    w.Mat(g.w_tilde);
    w.F64(g.sigma2_mu_tilde);
    w.F64(g.sigma2_w_tilde);
    w.F64(g.alpha);
    w.F64(g.beta);
  }
  return w.Finish();
}

DecodedParams DeserializeParams(std::span<const uint8_t> bytes) {
  if (bytes.size() < 5) {
    throw Error(ErrorCode::kTruncatedMessage, "message shorter than its header");
  }
  if (std::memcmp(bytes.data(), kWireMagic, 4) != 0) {
    throw Error(ErrorCode::kBadMagic, "not a parameter message");
  }
  if (bytes[4] != kWireVersion) {
    throw Error(ErrorCode::kFormatVersionMismatch,
                "version " + std::to_string(bytes[4]) + ", expected " +
                    std::to_string(kWireVersion));
  }
  if (bytes.size() < 8) {
    throw Error(ErrorCode::kTruncatedMessage, "message has no checksum");
  }
  const std::span<const uint8_t> payload = bytes.first(bytes.size() - 8);
  Reader r(payload);
  for (int i = 0; i < 5; ++i) r.U8();
  const uint64_t digest = r.U64();
  const uint8_t kind = r.U8();
  const int q = static_cast<int>(r.U32());
  const uint32_t num_views = r.U32();
  if (kind != kLocalKind && kind != kGlobalKind) {
    throw Error(ErrorCode::kChecksumFailure, "unknown message kind");
  }

  std::vector<ViewSpec> specs;
  LocalParams local(q, 0);
  GlobalParams global;
  global.latent_dim = q;
  for (uint32_t k = 0; k < num_views; ++k) {
    ViewSpec spec;
    spec.name = r.Str();
    spec.dim = static_cast<int>(r.U32());
    const bool present = r.U8() != 0;
    specs.push_back(spec);
    if (kind == kLocalKind) {
      local.views.emplace_back();
      if (!present) continue;
      ViewParams v;
      v.mu = r.Vec(spec.dim);
      v.w = r.Mat(spec.dim, q);
      v.sigma2 = r.F64();
      local.views.back() = std::move(v);
    } else {
      GlobalViewParams g;
      g.mu_tilde = r.Vec(spec.dim);
      g.w_tilde = r.Mat(spec.dim, q);
      g.sigma2_mu_tilde = r.F64();
      g.sigma2_w_tilde = r.F64();
      g.alpha = r.F64();
      g.beta = r.F64();
      global.views.push_back(std::move(g));
    }
  }
  if (r.position() != payload.size()) {
    throw Error(ErrorCode::kChecksumFailure, "unexpected trailing bytes");
  }
  Fnv1a64 h;
  h.AddBytes(payload.data(), payload.size());
  Reader tail(bytes.subspan(payload.size()));
  if (tail.U64() != h.value()) {
    throw Error(ErrorCode::kChecksumFailure, "payload checksum differs");
  }
  ViewLayout layout(specs);
  if (layout.digest() != digest) {
    throw Error(ErrorCode::kChecksumFailure, "layout digest differs");
  }
  if (kind == kLocalKind) return {std::move(layout), std::move(local)};
  return {std::move(layout), std::move(global)};
}

void WriteBytesFile(const std::string& path, const Bytes& bytes) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::kIoError, "cannot open '" + path + "'");
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(ErrorCode::kIoError, "cannot write '" + path + "'");
}

Bytes ReadBytesFile(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIoError, "cannot open '" + path + "'");
  return Bytes(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

}  // namespace fedppca
