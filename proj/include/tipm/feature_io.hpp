// tipm/feature_io.hpp

// Copyright 2026 The tipm Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

#ifndef TIPM_FEATURE_IO_HPP_
#define TIPM_FEATURE_IO_HPP_

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <complex>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iterator>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "tipm/common.hpp"

namespace tipm {

struct AudioSignal {
  std::vector<double> samples;  // in [-1, 1]
  int sample_rate = 16000;
};

/// Ordered frames of one utterance, each of dimension `dim`.
class FeatureSet {
 public:
  FeatureSet() = default;
  FeatureSet(std::size_t dim, std::string utterance_id = {})
      : dim_(dim), utterance_id_(std::move(utterance_id)) {
    if (dim_ == 0) throw InputError("FeatureSet: dimension must be >= 1");
  }

  /// Builds from row vectors; every row must have length `dim`.
  static FeatureSet FromRows(std::size_t dim, const std::vector<Vector> &rows,
                             std::string utterance_id = {}) {
    FeatureSet fs(dim, std::move(utterance_id));
    for (const auto &r : rows) fs.Append(r);
    return fs;
  }

  void Append(std::span<const double> frame) {
    if (frame.size() != dim_)
      throw InputError("FeatureSet::Append: frame dim " + std::to_string(frame.size()) +
                       " != " + std::to_string(dim_));
    for (double x : frame)
      if (!std::isfinite(x)) throw InputError("FeatureSet::Append: non-finite component");
    data_.insert(data_.end(), frame.begin(), frame.end());
  }

  std::size_t size() const { return dim_ == 0 ? 0 : data_.size() / dim_; }
  std::size_t dim() const { return dim_; }
  bool empty() const { return data_.empty(); }
  const std::string &utterance_id() const { return utterance_id_; }
  void set_utterance_id(std::string id) { utterance_id_ = std::move(id); }

  std::span<const double> frame(std::size_t i) const { return {data_.data() + i * dim_, dim_}; }
  std::span<double> mutable_frame(std::size_t i) { return {data_.data() + i * dim_, dim_}; }
  const std::vector<double> &data() const { return data_; }

  bool operator==(const FeatureSet &) const = default;

 private:
  std::size_t dim_ = 0;
  std::string utterance_id_;
  std::vector<double> data_;
};

/// Per-frame keep flags produced by an external frame selector.
struct FrameMask {
  std::vector<bool> keep;
  std::string source;

  std::size_t popcount() const {
    return static_cast<std::size_t>(std::count(keep.begin(), keep.end(), true));
  }
};

struct MfccConfig {
  double frame_len_ms = 25.0;
  double frame_hop_ms = 10.0;
  std::size_t n_fft = 512;
  std::size_t n_mel_filters = 26;
  std::size_t n_ceps = 13;
  double preemphasis = 0.97;
  bool cmn = true;

  void Validate() const {
    if (!(frame_len_ms > 0.0) || !(frame_hop_ms > 0.0))
      throw ConfigError("MfccConfig: frame_len_ms and frame_hop_ms must be positive");
    if (frame_hop_ms > frame_len_ms)
      throw ConfigError("MfccConfig: frame_hop_ms must not exceed frame_len_ms");
    if (n_fft == 0 || (n_fft & (n_fft - 1)) != 0)
      throw ConfigError("MfccConfig: n_fft must be a power of two");
    if (n_mel_filters == 0 || n_ceps == 0)
      throw ConfigError("MfccConfig: n_mel_filters and n_ceps must be positive");
    if (n_ceps > n_mel_filters)
      throw ConfigError("MfccConfig: n_ceps must not exceed n_mel_filters");
    if (!(preemphasis >= 0.0 && preemphasis < 1.0))
      throw ConfigError("MfccConfig: preemphasis must be in [0, 1)");
  }
};

// ---------------------------------------------------------------------------
// Little-endian helpers.

namespace detail {

inline void PutU16(std::string &out, std::uint16_t v) {
  out.push_back(static_cast<char>(v & 0xFF));
  out.push_back(static_cast<char>((v >> 8) & 0xFF));
}

inline void PutU32(std::string &out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

inline void PutU64(std::string &out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

inline std::uint16_t GetU16(const unsigned char *p) {
  return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
}

inline std::uint32_t GetU32(const unsigned char *p) {
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

inline std::uint64_t GetU64(const unsigned char *p) {
  std::uint64_t v = 0;
  for (int i = 7; i >= 0; --i) v = (v << 8) | p[i];
  return v;
}

inline std::string ReadFileBytes(const std::string &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open '" + path + "'");
  return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

inline void WriteFileBytes(const std::string &path, const std::string &bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw InputError("cannot open '" + path + "' for writing");
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw InputError("write failed for '" + path + "'");
}

}  // namespace detail

// ---------------------------------------------------------------------------
// WAV.

/// Parses a RIFF/WAVE PCM 16-bit mono byte image.
inline AudioSignal ParseWav(const std::string &bytes, const std::string &name = "<memory>") {
  auto fail = [&](const std::string &what) { throw InputError(name + ": " + what); };
  const auto *p = reinterpret_cast<const unsigned char *>(bytes.data());
  if (bytes.size() < 12) fail("malformed header: file shorter than RIFF header");
  if (std::memcmp(p, "RIFF", 4) != 0) fail("malformed header: ChunkID is not 'RIFF'");
  if (std::memcmp(p + 8, "WAVE", 4) != 0) fail("malformed header: Format is not 'WAVE'");

  bool have_fmt = false;
  std::uint16_t format = 0, channels = 0, bits = 0;
  std::uint32_t rate = 0;
  std::size_t pos = 12;
  while (pos + 8 <= bytes.size()) {
    const std::uint32_t size = detail::GetU32(p + pos + 4);
    const std::size_t body = pos + 8;
    if (std::memcmp(p + pos, "fmt ", 4) == 0) {
      if (size < 16 || body + 16 > bytes.size()) fail("malformed header: fmt chunk too short");
      format = detail::GetU16(p + body);
      channels = detail::GetU16(p + body + 2);
      rate = detail::GetU32(p + body + 4);
      bits = detail::GetU16(p + body + 14);
      have_fmt = true;
    } else if (std::memcmp(p + pos, "data", 4) == 0) {
      if (!have_fmt) fail("malformed header: data chunk before fmt chunk");
      if (format != 1) fail("unsupported encoding: AudioFormat=" + std::to_string(format) + " (need 1, PCM)");
      if (channels != 1) fail("unsupported encoding: NumChannels=" + std::to_string(channels) + " (need 1)");
      if (bits != 16) fail("unsupported encoding: BitsPerSample=" + std::to_string(bits) + " (need 16)");
      if (rate == 0) fail("malformed header: SampleRate=0");
      if (body + size > bytes.size()) fail("malformed header: data chunk size exceeds file");
      if (size % 2 != 0) fail("malformed header: odd data chunk size " + std::to_string(size));
      AudioSignal sig;
      sig.sample_rate = static_cast<int>(rate);
      sig.samples.resize(size / 2);
      for (std::size_t i = 0; i < sig.samples.size(); ++i) {
        const auto raw = static_cast<std::int16_t>(detail::GetU16(p + body + 2 * i));
        sig.samples[i] = static_cast<double>(raw) / 32768.0;
      }
      return sig;
    }
    pos = body + size + (size & 1u);
  }
  if (!have_fmt) fail("malformed header: missing fmt chunk");
  fail("malformed header: missing data chunk");
  return {};
}

inline AudioSignal ReadWav(const std::string &path) {
  return ParseWav(detail::ReadFileBytes(path), path);
}

/// Serialises as a 44-byte-header PCM 16-bit mono file. Samples are clamped
/// to [-1, 1] and rounded to the nearest 16-bit step.
inline std::string EncodeWav(const AudioSignal &sig) {
  std::string out;
  const auto data_bytes = static_cast<std::uint32_t>(sig.samples.size() * 2);
  out.append("RIFF");
  detail::PutU32(out, 36 + data_bytes);
  out.append("WAVEfmt ");
  detail::PutU32(out, 16);
  detail::PutU16(out, 1);
  detail::PutU16(out, 1);
  detail::PutU32(out, static_cast<std::uint32_t>(sig.sample_rate));
  detail::PutU32(out, static_cast<std::uint32_t>(sig.sample_rate) * 2);
  detail::PutU16(out, 2);
  detail::PutU16(out, 16);
  out.append("data");
  detail::PutU32(out, data_bytes);
  for (double s : sig.samples) {
    const double scaled = std::round(std::clamp(s, -1.0, 1.0) * 32768.0);
    const auto v = static_cast<std::int16_t>(std::clamp(scaled, -32768.0, 32767.0));
    detail::PutU16(out, static_cast<std::uint16_t>(v));
  }
  return out;
}

inline void WriteWav(const std::string &path, const AudioSignal &sig) {
  detail::WriteFileBytes(path, EncodeWav(sig));
}

// ---------------------------------------------------------------------------
// MFCC front-end.

namespace detail {

/// In-place iterative radix-2 FFT; size must be a power of two.
inline void Fft(std::vector<std::complex<double>> &x) {
  const std::size_t n = x.size();
  for (std::size_t i = 1, j = 0; i < n; ++i) {
    std::size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(x[i], x[j]);
  }
  for (std::size_t len = 2; len <= n; len <<= 1) {
    const double ang = -2.0 * std::numbers::pi / static_cast<double>(len);
    for (std::size_t start = 0; start < n; start += len) {
      for (std::size_t k = 0; k < len / 2; ++k) {
        const std::complex<double> w(std::cos(ang * static_cast<double>(k)),
                                     std::sin(ang * static_cast<double>(k)));
        const auto t = w * x[start + k + len / 2];
        x[start + k + len / 2] = x[start + k] - t;
        x[start + k] += t;
      }
    }
  }
}

inline double HzToMel(double hz) { return 2595.0 * std::log10(1.0 + hz / 700.0); }
inline double MelToHz(double mel) { return 700.0 * (std::pow(10.0, mel / 2595.0) - 1.0); }

/// Triangular filters equally spaced on the mel scale over [0, Nyquist],
/// evaluated at the n_fft/2 + 1 bin centre frequencies.
inline std::vector<Vector> MelFilterbank(std::size_t n_filters, std::size_t n_fft, int rate) {
  const std::size_t n_bins = n_fft / 2 + 1;
  const double nyquist = rate / 2.0;
  const double mel_hi = HzToMel(nyquist);
  Vector edges(n_filters + 2);
  for (std::size_t i = 0; i < edges.size(); ++i)
    edges[i] = MelToHz(mel_hi * static_cast<double>(i) / static_cast<double>(n_filters + 1));
  std::vector<Vector> bank(n_filters, Vector(n_bins, 0.0));
  for (std::size_t m = 0; m < n_filters; ++m) {
    const double lo = edges[m], mid = edges[m + 1], hi = edges[m + 2];
    for (std::size_t k = 0; k < n_bins; ++k) {
      const double f = static_cast<double>(k) * rate / static_cast<double>(n_fft);
      if (f > lo && f < mid) bank[m][k] = (f - lo) / (mid - lo);
      else if (f >= mid && f < hi) bank[m][k] = (hi - f) / (hi - mid);
    }
  }
  return bank;
}

inline std::size_t MsToSamples(double ms, int rate) {
  return static_cast<std::size_t>(std::llround(ms * rate / 1000.0));
}

}  // namespace detail

inline constexpr double kLogFloor = 1e-10;

/// Number of frames extract_mfcc produces for `n_samples` samples.
inline std::size_t MfccFrameCount(std::size_t n_samples, const MfccConfig &cfg, int rate) {
  const std::size_t len = detail::MsToSamples(cfg.frame_len_ms, rate);
  const std::size_t hop = detail::MsToSamples(cfg.frame_hop_ms, rate);
  if (n_samples < len) return 0;
  return (n_samples - len) / hop + 1;
}

/// Pre-emphasis, Hamming window, |FFT|^2, mel filterbank, log, DCT-II
/// (orthonormal). c0 is replaced by the log energy of the pre-emphasised
/// frame before windowing. Optional per-utterance cepstral mean removal.
inline FeatureSet ExtractMfcc(const AudioSignal &signal, const MfccConfig &cfg,
                              std::string utterance_id = {}) {
  cfg.Validate();
  if (signal.sample_rate <= 0) throw InputError("ExtractMfcc: sample_rate must be positive");
  const int rate = signal.sample_rate;
  const std::size_t len = detail::MsToSamples(cfg.frame_len_ms, rate);
  const std::size_t hop = detail::MsToSamples(cfg.frame_hop_ms, rate);
  if (len == 0 || hop == 0) throw ConfigError("ExtractMfcc: frame length rounds to zero samples");
  if (cfg.n_fft < len)
    throw ConfigError("ExtractMfcc: n_fft " + std::to_string(cfg.n_fft) +
                      " is shorter than the frame (" + std::to_string(len) + " samples)");
  const std::size_t n_frames = MfccFrameCount(signal.samples.size(), cfg, rate);
  if (n_frames == 0)
    throw InputError("ExtractMfcc: signal of " + std::to_string(signal.samples.size()) +
                     " samples is shorter than one frame (" + std::to_string(len) + ")");

  Vector emph(signal.samples.size());
  emph[0] = signal.samples[0];
  for (std::size_t i = 1; i < emph.size(); ++i)
    emph[i] = signal.samples[i] - cfg.preemphasis * signal.samples[i - 1];

  Vector window(len);
  for (std::size_t i = 0; i < len; ++i)
    window[i] = len == 1 ? 1.0
                         : 0.54 - 0.46 * std::cos(2.0 * std::numbers::pi * static_cast<double>(i) /
                                                  static_cast<double>(len - 1));
  const auto bank = detail::MelFilterbank(cfg.n_mel_filters, cfg.n_fft, rate);
  const std::size_t n_bins = cfg.n_fft / 2 + 1;
  const std::size_t m_filters = cfg.n_mel_filters;

  FeatureSet out(cfg.n_ceps, std::move(utterance_id));
  std::vector<std::complex<double>> spec(cfg.n_fft);
  Vector power(n_bins), log_mel(m_filters), ceps(cfg.n_ceps);
  for (std::size_t f = 0; f < n_frames; ++f) {
    const double *frame = emph.data() + f * hop;
    double energy = 0.0;
    for (std::size_t i = 0; i < len; ++i) energy += frame[i] * frame[i];
    std::fill(spec.begin(), spec.end(), std::complex<double>(0.0, 0.0));
    for (std::size_t i = 0; i < len; ++i) spec[i] = frame[i] * window[i];
    detail::Fft(spec);
    for (std::size_t k = 0; k < n_bins; ++k) power[k] = std::norm(spec[k]);
    for (std::size_t m = 0; m < m_filters; ++m) {
      double e = 0.0;
      for (std::size_t k = 0; k < n_bins; ++k) e += bank[m][k] * power[k];
      log_mel[m] = std::log(e + kLogFloor);
    }
    for (std::size_t c = 0; c < cfg.n_ceps; ++c) {
      double acc = 0.0;
      for (std::size_t m = 0; m < m_filters; ++m)
        acc += log_mel[m] * std::cos(std::numbers::pi * static_cast<double>(c) *
                                     (static_cast<double>(m) + 0.5) / static_cast<double>(m_filters));
      const double scale = c == 0 ? std::sqrt(1.0 / m_filters) : std::sqrt(2.0 / m_filters);
      ceps[c] = scale * acc;
    }
    ceps[0] = std::log(energy + kLogFloor);
    out.Append(ceps);
  }

  if (cfg.cmn) {
    Vector mean(cfg.n_ceps, 0.0);
    for (std::size_t f = 0; f < n_frames; ++f)
      for (std::size_t c = 0; c < cfg.n_ceps; ++c) mean[c] += out.frame(f)[c];
    for (double &m : mean) m /= static_cast<double>(n_frames);
    for (std::size_t f = 0; f < n_frames; ++f) {
      auto fr = out.mutable_frame(f);
      for (std::size_t c = 0; c < cfg.n_ceps; ++c) fr[c] -= mean[c];
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Noise mixing.

inline double MeanSquare(std::span<const double> x) {
  if (x.empty()) return 0.0;
  double acc = 0.0;
  for (double v : x) acc += v * v;
  return acc / static_cast<double>(x.size());
}

struct MixResult {
  AudioSignal signal;
  double gain = 0.0;  // applied to the tiled noise
  std::size_t clipped = 0;  // samples clamped to [-1, 1]
};

/// Adds `noise` at the requested SNR. The noise is repeated cyclically from
/// offset 0 (or truncated) to the signal length; powers are mean squares
/// over the full signal length.
inline MixResult MixNoise(const AudioSignal &signal, const AudioSignal &noise, double snr_db) {
  if (signal.sample_rate != noise.sample_rate)
    throw InputError("MixNoise: sample-rate mismatch (" + std::to_string(signal.sample_rate) +
                     " vs " + std::to_string(noise.sample_rate) + ")");
  if (signal.samples.empty()) throw InputError("MixNoise: empty signal");
  if (noise.samples.empty()) throw InputError("MixNoise: zero-power noise");
  if (!std::isfinite(snr_db)) throw InputError("MixNoise: non-finite SNR");
  const std::size_t n = signal.samples.size();
  Vector tiled(n);
  for (std::size_t i = 0; i < n; ++i) tiled[i] = noise.samples[i % noise.samples.size()];
  const double p_signal = MeanSquare(signal.samples);
  const double p_noise = MeanSquare(tiled);
  if (!(p_signal > 0.0)) throw InputError("MixNoise: zero-power signal");
  if (!(p_noise > 0.0)) throw InputError("MixNoise: zero-power noise");

  MixResult out;
  out.gain = std::sqrt(p_signal / (p_noise * std::pow(10.0, snr_db / 10.0)));
  out.signal.sample_rate = signal.sample_rate;
  out.signal.samples.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double v = signal.samples[i] + out.gain * tiled[i];
    if (v > 1.0 || v < -1.0) ++out.clipped;
    out.signal.samples[i] = std::clamp(v, -1.0, 1.0);
  }
  return out;
}

/// 10 log10(P(clean) / P(mixed - clean)).
inline double MeasureSnrDb(const AudioSignal &clean, const AudioSignal &mixed) {
  if (clean.samples.size() != mixed.samples.size())
    throw InputError("MeasureSnrDb: length mismatch");
  Vector diff(clean.samples.size());
  for (std::size_t i = 0; i < diff.size(); ++i) diff[i] = mixed.samples[i] - clean.samples[i];
  return 10.0 * std::log10(MeanSquare(clean.samples) / MeanSquare(diff));
}

// ---------------------------------------------------------------------------
// Frame masks.

inline FeatureSet ApplyMask(const FeatureSet &features, const FrameMask &mask) {
  if (mask.keep.size() != features.size())
    throw InputError("ApplyMask: mask has " + std::to_string(mask.keep.size()) +
                     " entries for " + std::to_string(features.size()) + " frames");
  FeatureSet out(features.dim(), features.utterance_id());
  for (std::size_t i = 0; i < features.size(); ++i)
    if (mask.keep[i]) out.Append(features.frame(i));
  return out;
}

/// Text mask: one line per frame, "0" or "1".
inline FrameMask ParseMask(const std::string &text, const std::string &source = "file") {
  FrameMask mask;
  mask.source = source;
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line == "0") mask.keep.push_back(false);
    else if (line == "1") mask.keep.push_back(true);
    else if (line.empty() && in.peek() == EOF) break;
    else
      throw InputError(source + ":" + std::to_string(lineno) + ": expected '0' or '1', got '" +
                       line + "'");
  }
  return mask;
}

inline FrameMask ReadMask(const std::string &path) {
  return ParseMask(detail::ReadFileBytes(path), path);
}

inline void WriteMask(const std::string &path, const FrameMask &mask) {
  std::string out;
  for (bool k : mask.keep) out.append(k ? "1\n" : "0\n");
  detail::WriteFileBytes(path, out);
}

// ---------------------------------------------------------------------------
// Binary matrix files: magic(4) u32 rows u32 dim u32 reserved=0, then
// rows*dim little-endian IEEE-754 doubles, row major.

inline constexpr std::array<char, 4> kFeatureMagic = {'V', 'Q', 'F', '1'};
inline constexpr std::array<char, 4> kCodebookMagic = {'V', 'Q', 'C', '1'};
inline constexpr std::size_t kMatrixHeaderBytes = 16;

namespace detail {

inline std::string EncodeMatrixFile(const std::array<char, 4> &magic, std::size_t rows,
                                    std::size_t dim, std::span<const double> values) {
  if (dim == 0) throw InputError("cannot serialise dimension 0");
  std::string out;
  out.reserve(kMatrixHeaderBytes + values.size() * 8);
  out.append(magic.data(), 4);
  PutU32(out, static_cast<std::uint32_t>(rows));
  PutU32(out, static_cast<std::uint32_t>(dim));
  PutU32(out, 0);
  for (double v : values) PutU64(out, std::bit_cast<std::uint64_t>(v));
  return out;
}

struct DecodedMatrix {
  std::size_t rows = 0;
  std::size_t dim = 0;
  std::vector<double> values;
};

inline DecodedMatrix DecodeMatrixFile(const std::array<char, 4> &magic, const std::string &bytes,
                                      const std::string &name) {
  if (bytes.size() < kMatrixHeaderBytes) throw InputError(name + ": truncated header");
  if (std::memcmp(bytes.data(), magic.data(), 4) != 0)
    throw InputError(name + ": bad magic '" + bytes.substr(0, 4) + "', expected '" +
                     std::string(magic.data(), 4) + "'");
  const auto *p = reinterpret_cast<const unsigned char *>(bytes.data());
  DecodedMatrix m;
  m.rows = GetU32(p + 4);
  m.dim = GetU32(p + 8);
  if (m.dim == 0) throw InputError(name + ": dimension 0");
  if (GetU32(p + 12) != 0) throw InputError(name + ": reserved header field is not 0");
  const std::size_t count = m.rows * m.dim;
  if (bytes.size() != kMatrixHeaderBytes + count * 8)
    throw InputError(name + ": truncated payload (expected " +
                     std::to_string(kMatrixHeaderBytes + count * 8) + " bytes, got " +
                     std::to_string(bytes.size()) + ")");
  m.values.resize(count);
  for (std::size_t i = 0; i < count; ++i)
    m.values[i] = std::bit_cast<double>(GetU64(p + kMatrixHeaderBytes + 8 * i));
  return m;
}

inline std::string StemOf(const std::string &path) {
  const auto slash = path.find_last_of('/');
  std::string base = slash == std::string::npos ? path : path.substr(slash + 1);
  const auto dot = base.find_last_of('.');
  return dot == std::string::npos || dot == 0 ? base : base.substr(0, dot);
}

}  // namespace detail

inline std::string EncodeFeatures(const FeatureSet &fs) {
  return detail::EncodeMatrixFile(kFeatureMagic, fs.size(), fs.dim(), fs.data());
}

inline FeatureSet DecodeFeatures(const std::string &bytes, const std::string &name,
                                 std::string utterance_id) {
  auto m = detail::DecodeMatrixFile(kFeatureMagic, bytes, name);
  FeatureSet fs(m.dim, std::move(utterance_id));
  for (std::size_t r = 0; r < m.rows; ++r)
    fs.Append(std::span<const double>(m.values.data() + r * m.dim, m.dim));
  return fs;
}

inline void WriteFeatures(const std::string &path, const FeatureSet &fs) {
  detail::WriteFileBytes(path, EncodeFeatures(fs));
}

/// The utterance id is taken from the file stem.
inline FeatureSet ReadFeatures(const std::string &path) {
  return DecodeFeatures(detail::ReadFileBytes(path), path, detail::StemOf(path));
}

}  // namespace tipm

#endif  // TIPM_FEATURE_IO_HPP_
