// tests/feature_io_test.cpp

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

#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <numbers>

#include "test_support.hpp"
#include "tipm/feature_io.hpp"

namespace tipm {
namespace {

// Hand-assembled 44-byte header followed by raw little-endian samples.
std::string WavBytes(const std::vector<std::uint16_t> &samples, std::uint16_t format = 1,
                     std::uint16_t channels = 1, std::uint16_t bits = 16, std::uint32_t rate = 16000) {
  std::string b;
  auto u16 = [&](std::uint16_t v) { b.push_back(char(v & 0xff)), b.push_back(char(v >> 8)); };
  auto u32 = [&](std::uint32_t v) { u16(std::uint16_t(v & 0xffff)), u16(std::uint16_t(v >> 16)); };
  const std::uint32_t data = static_cast<std::uint32_t>(samples.size() * 2);
  b += "RIFF";
  u32(36 + data);
  b += "WAVEfmt ";
  u32(16);
  u16(format);
  u16(channels);
  u32(rate);
  u32(rate * channels * bits / 8);
  u16(std::uint16_t(channels * bits / 8));
  u16(bits);
  b += "data";
  u32(data);
  for (auto s : samples) u16(s);
  return b;
}

TEST(WavTest, ScalingAndTwosComplement) {
  const std::string bytes = WavBytes({0x0000, 0x8000});
  EXPECT_EQ(bytes.size(), 48u);
  const AudioSignal s = ParseWav(bytes);
  ASSERT_EQ(s.samples.size(), 2u);
  EXPECT_EQ(s.samples[0], 0.0);
  EXPECT_EQ(s.samples[1], -1.0);
  EXPECT_EQ(ParseWav(WavBytes({0x7FFF})).samples[0], 32767.0 / 32768.0);
}

TEST(WavTest, SilenceFile) {
  testing::TempDir dir("wav");
  detail::WriteFileBytes(dir / "s.wav", WavBytes(std::vector<std::uint16_t>(16000, 0)));
  const AudioSignal s = ReadWav(dir / "s.wav");
  EXPECT_EQ(s.samples.size(), 16000u);
  EXPECT_EQ(s.sample_rate, 16000);
  for (double x : s.samples) ASSERT_EQ(x, 0.0);
}

TEST(WavTest, UnsupportedEncodingsNameTheField) {
  auto message = [](const std::string &bytes) {
    try {
      ParseWav(bytes, "f.wav");
    } catch (const InputError &e) {
      return std::string(e.what());
    }
    return std::string();
  };
  EXPECT_NE(message(WavBytes({0}, 3)).find("AudioFormat"), std::string::npos);
  EXPECT_NE(message(WavBytes({0, 0}, 1, 2)).find("NumChannels"), std::string::npos);
  EXPECT_NE(message(WavBytes({0, 0}, 1, 1, 8)).find("BitsPerSample"), std::string::npos);
  EXPECT_NE(message("RIFX0000WAVE").find("malformed header"), std::string::npos);
  EXPECT_NE(message("RIFF").find("malformed header"), std::string::npos);
  std::string truncated = WavBytes({1, 2, 3});
  truncated.resize(truncated.size() - 2);
  EXPECT_NE(message(truncated).find("exceeds"), std::string::npos);
}

TEST(WavTest, EncodeRoundTrip) {
  AudioSignal s;
  s.sample_rate = 8000;
  for (int i = -5; i < 5; ++i) s.samples.push_back(i / 32768.0);
  EXPECT_EQ(ParseWav(EncodeWav(s)).samples, s.samples);
}

AudioSignal Tone(double hz, double seconds, double amp = 0.5, int rate = 16000) {
  AudioSignal s;
  s.sample_rate = rate;
  const auto n = static_cast<std::size_t>(seconds * rate);
  for (std::size_t i = 0; i < n; ++i) s.samples.push_back(amp * std::sin(2 * std::numbers::pi * hz * i / rate));
  return s;
}

TEST(MfccTest, FrameCountForOneSecond) {
  AudioSignal s;
  s.samples.assign(16000, 0.0);
  const FeatureSet f = ExtractMfcc(s, MfccConfig{});
  EXPECT_EQ(f.size(), 98u);
  EXPECT_EQ(f.dim(), 13u);
}

TEST(MfccTest, SilenceIsFinite) {
  AudioSignal s;
  s.samples.assign(8000, 0.0);
  MfccConfig cfg;
  cfg.cmn = false;
  const FeatureSet f = ExtractMfcc(s, cfg);
  for (double x : f.data()) ASSERT_TRUE(std::isfinite(x));
}

TEST(MfccTest, CmnZeroesTheMean) {
  const FeatureSet f = ExtractMfcc(Tone(440, 0.5), MfccConfig{});
  for (std::size_t c = 0; c < f.dim(); ++c) {
    double m = 0.0;
    for (std::size_t i = 0; i < f.size(); ++i) m += f.frame(i)[c];
    EXPECT_NEAR(m / f.size(), 0.0, 1e-10);
  }
}

TEST(MfccTest, MatchesNaiveReference) {
  MfccConfig cfg;
  cfg.cmn = false;
  // Centre frequency of mel filter index 9.
  const double top = detail::HzToMel(8000.0);
  const double hz = detail::MelToHz(top * 10.0 / 27.0);
  const AudioSignal tone = Tone(hz, 0.1);
  const FeatureSet f = ExtractMfcc(tone, cfg);
  AudioSignal quiet;
  quiet.samples.assign(tone.samples.size(), 0.0);
  const FeatureSet silent = ExtractMfcc(quiet, cfg);
  for (std::size_t frame : {0u, 3u}) {
    std::vector<double> emph(400), win(400);
    double energy = 0.0;
    for (std::size_t i = 0; i < 400; ++i) {
      const std::size_t t = frame * 160 + i;
      emph[i] = tone.samples[t] - (t == 0 ? 0.0 : 0.97 * tone.samples[t - 1]);
      energy += emph[i] * emph[i];
      win[i] = emph[i] * (0.54 - 0.46 * std::cos(2 * std::numbers::pi * i / 399.0));
    }
    const auto ref = testing::ReferenceMfccFrame(win, 512, 16000, 26, 13);
    EXPECT_NEAR(f.frame(frame)[0], std::log(energy + 1e-10), 1e-9);
    for (std::size_t c = 1; c < 13; ++c) EXPECT_NEAR(f.frame(frame)[c], ref[c], 1e-8 * (1 + std::abs(ref[c])));
    EXPECT_GT(f.frame(frame)[0], silent.frame(frame)[0]);
  }
}

TEST(MfccTest, ToneEnergyConcentratesInItsFilter) {
  const double top = detail::HzToMel(8000.0);
  const double hz = detail::MelToHz(top * 10.0 / 27.0);
  const AudioSignal tone = Tone(hz, 0.05);
  std::vector<double> win(400);
  for (std::size_t i = 0; i < 400; ++i) win[i] = tone.samples[i] * (0.54 - 0.46 * std::cos(2 * std::numbers::pi * i / 399.0));
  const auto bank = detail::MelFilterbank(26, 512, 16000);
  std::vector<std::complex<double>> spec(512);
  for (std::size_t i = 0; i < 400; ++i) spec[i] = win[i];
  detail::Fft(spec);
  std::size_t best = 0;
  double best_e = -1;
  for (std::size_t m = 0; m < 26; ++m) {
    double e = 0;
    for (std::size_t k = 0; k < 257; ++k) e += bank[m][k] * std::norm(spec[k]);
    if (e > best_e) best_e = e, best = m;
  }
  EXPECT_EQ(best, 9u);
}

TEST(MfccTest, ErrorsAndValidation) {
  AudioSignal s;
  s.samples.assign(100, 0.0);
  EXPECT_THROW(ExtractMfcc(s, MfccConfig{}), InputError);
  MfccConfig bad;
  bad.n_fft = 500;
  EXPECT_THROW(bad.Validate(), ConfigError);
  bad = {};
  bad.n_ceps = 30;
  EXPECT_THROW(bad.Validate(), ConfigError);
  bad = {};
  bad.frame_hop_ms = 30;
  EXPECT_THROW(bad.Validate(), ConfigError);
}

TEST(FftTest, MatchesNaiveDft) {
  Xorshift64Star rng(1);
  std::vector<std::complex<double>> x(64);
  for (auto &v : x) v = {rng.Normal(), rng.Normal()};
  auto y = x;
  detail::Fft(y);
  for (std::size_t k = 0; k < 64; ++k) {
    std::complex<double> acc = 0;
    for (std::size_t t = 0; t < 64; ++t) acc += x[t] * std::polar(1.0, -2 * std::numbers::pi * double(k * t) / 64.0);
    EXPECT_NEAR(std::abs(acc - y[k]), 0.0, 1e-10);
  }
}

AudioSignal WhiteNoise(std::uint64_t seed, std::size_t n, double amp) {
  Xorshift64Star rng(seed);
  AudioSignal s;
  for (std::size_t i = 0; i < n; ++i) s.samples.push_back(amp * rng.Uniform(-1.0, 1.0));
  return s;
}

TEST(MixNoiseTest, GainDefinition) {
  const AudioSignal a = WhiteNoise(1, 1000, 0.1);
  EXPECT_NEAR(MixNoise(a, a, 0.0).gain, 1.0, 1e-15);
  EXPECT_NEAR(MixNoise(a, a, 20.0).gain, 0.1, 1e-15);
}

TEST(MixNoiseTest, MeasuredSnrMatchesRequest) {
  const AudioSignal sig = WhiteNoise(2, 32000, 0.3);
  const AudioSignal noise = WhiteNoise(3, 5000, 0.4);  // shorter: tiled
  for (double snr : {15.0, 20.0, 25.0}) {
    const MixResult r = MixNoise(sig, noise, snr);
    ASSERT_EQ(r.clipped, 0u);
    EXPECT_NEAR(MeasureSnrDb(sig, r.signal), snr, 0.01);
  }
}

TEST(MixNoiseTest, TilingStartsAtOffsetZero) {
  AudioSignal sig, noise;
  sig.samples = {0.1, 0.1, 0.1, 0.1, 0.1};
  noise.samples = {0.2, -0.2};
  const MixResult r = MixNoise(sig, noise, 0.0);
  EXPECT_NEAR(r.signal.samples[4] - 0.1, r.gain * 0.2, 1e-15);
  EXPECT_NEAR(r.signal.samples[3] - 0.1, -r.gain * 0.2, 1e-15);
}

TEST(MixNoiseTest, ClippingIsCounted) {
  AudioSignal sig, noise;
  sig.samples = {0.9, -0.9, 0.0};
  noise.samples = {1.0, -1.0, 0.0};
  const MixResult r = MixNoise(sig, noise, -20.0);
  EXPECT_EQ(r.clipped, 2u);
  EXPECT_EQ(r.signal.samples[0], 1.0);
  EXPECT_EQ(r.signal.samples[1], -1.0);
}

TEST(MixNoiseTest, Errors) {
  AudioSignal sig = WhiteNoise(4, 10, 0.1), silent;
  silent.samples.assign(10, 0.0);
  AudioSignal other = sig;
  other.sample_rate = 8000;
  EXPECT_THROW(MixNoise(sig, other, 10), InputError);
  EXPECT_THROW(MixNoise(sig, silent, 10), InputError);
  EXPECT_THROW(MixNoise(silent, sig, 10), InputError);
}

FeatureSet Ten() {
  FeatureSet f(2, "u");
  for (int i = 0; i < 10; ++i) f.Append(Vector{double(i), -double(i)});
  return f;
}

TEST(MaskTest, IdentityEmptyAndAlternating) {
  const FeatureSet f = Ten();
  FrameMask all{std::vector<bool>(10, true), "t"};
  EXPECT_EQ(ApplyMask(f, all), f);
  FrameMask none{std::vector<bool>(10, false), "t"};
  EXPECT_TRUE(ApplyMask(f, none).empty());
  FrameMask alt{{}, "t"};
  for (int i = 0; i < 10; ++i) alt.keep.push_back(i % 2 == 0);
  const FeatureSet a = ApplyMask(f, alt);
  ASSERT_EQ(a.size(), alt.popcount());
  for (std::size_t i = 0; i < a.size(); ++i) EXPECT_EQ(a.frame(i)[0], 2.0 * i);
  EXPECT_THROW(ApplyMask(f, FrameMask{{true}, "t"}), InputError);
}

TEST(MaskTest, FileFormat) {
  testing::TempDir dir("mask");
  WriteMask(dir / "m.txt", FrameMask{{true, false, true}, "x"});
  EXPECT_EQ(detail::ReadFileBytes(dir / "m.txt"), "1\n0\n1\n");
  EXPECT_EQ(ReadMask(dir / "m.txt").keep, (std::vector<bool>{true, false, true}));
  EXPECT_THROW(ParseMask("1\n2\n"), InputError);
}

TEST(FeatureFileTest, LayoutAndRoundTrip) {
  testing::TempDir dir("feat");
  const FeatureSet f = FeatureSet::FromRows(3, {{1, 2, 3}, {4, 5, 6.5}}, "utt7");
  WriteFeatures(dir / "utt7.vqf", f);
  const std::string bytes = detail::ReadFileBytes(dir / "utt7.vqf");
  ASSERT_EQ(bytes.size(), 16u + 2 * 3 * 8);
  EXPECT_EQ(bytes.substr(0, 4), "VQF1");
  EXPECT_EQ(bytes.substr(4, 12), std::string("\x02\0\0\0\x03\0\0\0\0\0\0\0", 12));
  double last = 0;
  std::memcpy(&last, bytes.data() + 16 + 5 * 8, 8);
  EXPECT_EQ(last, 6.5);
  EXPECT_EQ(ReadFeatures(dir / "utt7.vqf"), f);
}

TEST(FeatureFileTest, RandomRoundTrips) {
  Xorshift64Star rng(9);
  for (int t = 0; t < 20; ++t) {
    const std::size_t d = 1 + rng.Below(20), n = rng.Below(50);
    FeatureSet f(d, "x");
    Vector row(d);
    for (std::size_t i = 0; i < n; ++i) {
      for (double &v : row) v = rng.Normal() * 1e3;
      f.Append(row);
    }
    EXPECT_EQ(DecodeFeatures(EncodeFeatures(f), "m", "x"), f);
  }
}

TEST(FeatureFileTest, Rejections) {
  std::string good = EncodeFeatures(FeatureSet::FromRows(2, {{1, 2}}));
  std::string bad_magic = good;
  bad_magic[3] = '2';
  EXPECT_THROW(DecodeFeatures(bad_magic, "f", "x"), InputError);
  EXPECT_THROW(DecodeFeatures(good.substr(0, good.size() - 1), "f", "x"), InputError);
  std::string zero_dim = good;
  zero_dim[8] = 0;
  EXPECT_THROW(DecodeFeatures(zero_dim, "f", "x"), InputError);
  std::string codebook = good;
  codebook[2] = 'C';
  EXPECT_THROW(DecodeFeatures(codebook, "f", "x"), InputError);
}

TEST(FeatureSetTest, Invariants) {
  EXPECT_THROW(FeatureSet(0), InputError);
  FeatureSet f(2);
  EXPECT_THROW(f.Append(Vector{1.0}), InputError);
  EXPECT_THROW(f.Append(Vector{1.0, NAN}), InputError);
  EXPECT_THROW(f.Append(Vector{INFINITY, 1.0}), InputError);
}

}  // namespace
}  // namespace tipm
