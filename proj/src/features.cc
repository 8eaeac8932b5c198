// vadkit/features.cc

// Copyright 2026  The vadkit Authors

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "vadkit/features.h"

#include <fftw3.h>

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <mutex>
#include <numbers>

namespace vadkit {

namespace {

std::mutex& FftwPlannerMutex() {
  static std::mutex mu;
  return mu;
}

void PutU32(std::string& out, uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

void PutF32(std::string& out, float f) { PutU32(out, std::bit_cast<uint32_t>(f)); }

uint32_t GetU32(std::string_view in, size_t pos) {
  uint32_t v = 0;
  for (int i = 0; i < 4; ++i) {
    v |= static_cast<uint32_t>(static_cast<unsigned char>(in[pos + i])) << (8 * i);
  }
  return v;
}

float GetF32(std::string_view in, size_t pos) { return std::bit_cast<float>(GetU32(in, pos)); }

}  // namespace

// Scratch buffers for one thread; the plan itself is shared and only ever
// used through the new-array execute interface.
struct FeatureExtractor::Fft {
  explicit Fft(int n)
      : n(n),
        in(static_cast<double*>(fftw_malloc(sizeof(double) * n))),
        out(static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * (n / 2 + 1)))) {}
  ~Fft() {
    fftw_free(in);
    fftw_free(out);
  }
  Fft(const Fft&) = delete;
  Fft& operator=(const Fft&) = delete;

  int n;
  double* in;
  fftw_complex* out;
  fftw_plan plan = nullptr;
};

std::string_view FeatureKindName(FeatureKind kind) {
  return kind == FeatureKind::kMfcc ? "mfcc" : "gfcc";
}

std::optional<FeatureKind> ParseFeatureKind(std::string_view name) {
  if (name == "mfcc" || name == "MFCC") return FeatureKind::kMfcc;
  if (name == "gfcc" || name == "GFCC") return FeatureKind::kGfcc;
  return std::nullopt;
}

FeatureOptions FeatureOptions::Mfcc() {
  FeatureOptions o;
  o.kind = FeatureKind::kMfcc;
  o.num_filters = 24;
  return o;
}

FeatureOptions FeatureOptions::Gfcc(int num_filters) {
  FeatureOptions o;
  o.kind = FeatureKind::kGfcc;
  o.num_filters = num_filters;
  return o;
}

void FeatureOptions::Validate(int rate) const {
  frame_params.Validate();
  const double hi = f_high > 0.0 ? f_high : rate / 2.0;
  if (num_filters < 1) throw VadError("features: need at least one filter");
  if (!(f_low < hi) || hi > rate / 2.0) {
    throw VadError("features: require f_low < f_high <= rate/2");
  }
  if (fft_size < frame_params.WindowSamples(rate)) {
    throw VadError("features: FFT size shorter than the analysis window");
  }
  if (num_ceps < 1 || num_ceps >= num_filters) {
    throw VadError("features: num_ceps must be in [1, num_filters)");
  }
}

std::vector<float> Preemphasis(std::span<const float> x, double coeff) {
  if (x.empty()) throw VadError("preemphasis: empty input");
  std::vector<float> y(x.size());
  y[0] = x[0];
  for (size_t n = 1; n < x.size(); ++n) {
    y[n] = static_cast<float>(static_cast<double>(x[n]) - coeff * x[n - 1]);
  }
  return y;
}

double HzToMel(double hz) { return 2595.0 * std::log10(1.0 + hz / 700.0); }
double MelToHz(double mel) { return 700.0 * (std::pow(10.0, mel / 2595.0) - 1.0); }
double HzToErb(double hz) { return 21.4 * std::log10(0.00437 * hz + 1.0); }
double ErbToHz(double erb) { return (std::pow(10.0, erb / 21.4) - 1.0) / 0.00437; }

int ErbFilterCount(double f_low, double f_high) {
  return static_cast<int>(std::lround(HzToErb(f_high) - HzToErb(f_low)));
}

std::vector<double> MelCenterFrequencies(int num_filters, double f_low, double f_high) {
  const double lo = HzToMel(f_low), hi = HzToMel(f_high);
  std::vector<double> c(static_cast<size_t>(num_filters));
  for (int m = 0; m < num_filters; ++m) {
    c[m] = MelToHz(lo + (hi - lo) * (m + 1) / (num_filters + 1));
  }
  return c;
}

std::vector<double> ErbCenterFrequencies(int num_filters, double f_low, double f_high) {
  const double lo = HzToErb(f_low), hi = HzToErb(f_high);
  std::vector<double> c(static_cast<size_t>(num_filters));
  for (int m = 0; m < num_filters; ++m) {
    const double t = num_filters == 1 ? 0.5 : static_cast<double>(m) / (num_filters - 1);
    c[m] = ErbToHz(lo + (hi - lo) * t);
  }
  return c;
}

Eigen::MatrixXd MelFilterbank(int num_filters, int fft_size, int rate, double f_low,
                              double f_high) {
  const int bins = fft_size / 2 + 1;
  const double lo = HzToMel(f_low), hi = HzToMel(f_high);
  const double step = (hi - lo) / (num_filters + 1);
  Eigen::MatrixXd fb = Eigen::MatrixXd::Zero(num_filters, bins);
  for (int m = 0; m < num_filters; ++m) {
    const double left = lo + step * m, center = left + step, right = center + step;
    for (int k = 0; k < bins; ++k) {
      const double mel = HzToMel(static_cast<double>(k) * rate / fft_size);
      if (mel > left && mel < right) {
        fb(m, k) = mel <= center ? (mel - left) / step : (right - mel) / step;
      }
    }
    const double area = fb.row(m).sum();
    if (area > 0.0) fb.row(m) /= area;
  }
  return fb;
}

Eigen::MatrixXd GammatoneFilterbank(int num_filters, int fft_size, int rate,
                                    double f_low, double f_high) {
  const int bins = fft_size / 2 + 1;
  const auto centers = ErbCenterFrequencies(num_filters, f_low, f_high);
  Eigen::MatrixXd fb(num_filters, bins);
  for (int m = 0; m < num_filters; ++m) {
    const double erb = 24.7 * (4.37 * centers[m] / 1000.0 + 1.0);
    const double b = 1.019 * erb;
    for (int k = 0; k < bins; ++k) {
      const double f = static_cast<double>(k) * rate / fft_size;
      const double x = (f - centers[m]) / b;
      fb(m, k) = 1.0 / ((1.0 + x * x) * (1.0 + x * x));  // (1 + x^2)^(-order/2)
    }
  }
  return fb;
}

Eigen::MatrixXd DctMatrix(int n) {
  Eigen::MatrixXd d(n, n);
  for (int k = 0; k < n; ++k) {
    const double s = k == 0 ? std::sqrt(1.0 / n) : std::sqrt(2.0 / n);
    for (int i = 0; i < n; ++i) {
      d(k, i) = s * std::cos(std::numbers::pi * k * (i + 0.5) / n);
    }
  }
  return d;
}

FeatureExtractor::FeatureExtractor(const FeatureOptions& options, int rate)
    : options_(options), rate_(rate) {
  options_.Validate(rate);
  win_ = options_.frame_params.WindowSamples(rate);
  hop_ = options_.frame_params.HopSamples(rate);
  window_.resize(static_cast<size_t>(win_));
  for (int i = 0; i < win_; ++i) {
    window_[i] = 0.54 - 0.46 * std::cos(2.0 * std::numbers::pi * i / (win_ - 1));
  }
  const double hi = options_.f_high > 0.0 ? options_.f_high : rate / 2.0;
  filterbank_ = options_.kind == FeatureKind::kMfcc
                    ? MelFilterbank(options_.num_filters, options_.fft_size, rate,
                                    options_.f_low, hi)
                    : GammatoneFilterbank(options_.num_filters, options_.fft_size, rate,
                                          options_.f_low, hi);
  dct_ = DctMatrix(options_.num_filters);
  plan_ = std::make_unique<Fft>(options_.fft_size);
  std::lock_guard<std::mutex> lock(FftwPlannerMutex());
  plan_->plan =
      fftw_plan_dft_r2c_1d(options_.fft_size, plan_->in, plan_->out, FFTW_ESTIMATE);
}

FeatureExtractor::~FeatureExtractor() {
  std::lock_guard<std::mutex> lock(FftwPlannerMutex());
  if (plan_ && plan_->plan) fftw_destroy_plan(plan_->plan);
}

void FeatureExtractor::FrameRow(std::span<const float> emph, int64_t frame, Fft& fft,
                                double* row, double* fbank_out) const {
  const int64_t start = frame * hop_;
  double energy = 0.0;
  for (int i = 0; i < win_; ++i) {
    const double v = window_[i] * emph[start + i];
    fft.in[i] = v;
    energy += v * v;
  }
  std::fill(fft.in + win_, fft.in + fft.n, 0.0);
  fftw_execute_dft_r2c(plan_->plan, fft.in, fft.out);
  const int bins = fft.n / 2 + 1;
  Eigen::VectorXd power(bins);
  for (int k = 0; k < bins; ++k) {
    power[k] = fft.out[k][0] * fft.out[k][0] + fft.out[k][1] * fft.out[k][1];
  }
  Eigen::VectorXd fbank = filterbank_ * power;
  if (fbank_out != nullptr) {
    std::copy(fbank.data(), fbank.data() + fbank.size(), fbank_out);
    return;
  }
  for (Eigen::Index m = 0; m < fbank.size(); ++m) {
    fbank[m] = std::log(std::max(fbank[m], options_.log_floor));
  }
  const Eigen::VectorXd ceps = dct_ * fbank;
  for (int c = 0; c < options_.num_ceps; ++c) row[c] = ceps[c + 1];
  row[options_.num_ceps] = std::log(std::max(energy, options_.log_floor));
}

FeatureMatrix FeatureExtractor::Static(std::span<const float> audio) const {
  FeatureMatrix out;
  out.kind = options_.kind;
  out.frame_params = options_.frame_params;
  const int64_t frames = NumFrames(static_cast<int64_t>(audio.size()),
                                   options_.frame_params, rate_);
  out.values.resize(frames, options_.num_ceps + 1);
  if (frames == 0) return out;
  const auto emph = Preemphasis(audio, options_.preemphasis);
#pragma omp parallel
  {
    Fft fft(options_.fft_size);
#pragma omp for schedule(static)
    for (int64_t f = 0; f < frames; ++f) {
      FrameRow(emph, f, fft, out.values.row(f).data(), nullptr);
    }
  }
  return out;
}

FeatureMatrix FeatureExtractor::StaticSerial(std::span<const float> audio) const {
  FeatureMatrix out;
  out.kind = options_.kind;
  out.frame_params = options_.frame_params;
  const int64_t frames = NumFrames(static_cast<int64_t>(audio.size()),
                                   options_.frame_params, rate_);
  out.values.resize(frames, options_.num_ceps + 1);
  if (frames == 0) return out;
  const auto emph = Preemphasis(audio, options_.preemphasis);
  Fft fft(options_.fft_size);
  for (int64_t f = 0; f < frames; ++f) {
    FrameRow(emph, f, fft, out.values.row(f).data(), nullptr);
  }
  return out;
}

Eigen::MatrixXd FeatureExtractor::FilterbankEnergies(std::span<const float> audio) const {
  const int64_t frames = NumFrames(static_cast<int64_t>(audio.size()),
                                   options_.frame_params, rate_);
  RowMatrix energies(frames, options_.num_filters);
  if (frames == 0) return energies;
  const auto emph = Preemphasis(audio, options_.preemphasis);
  Fft fft(options_.fft_size);
  for (int64_t f = 0; f < frames; ++f) {
    FrameRow(emph, f, fft, nullptr, energies.row(f).data());
  }
  return energies;
}

FeatureMatrix AddDeltas(const FeatureMatrix& static_features) {
  const auto& x = static_features.values;
  const Eigen::Index t_max = x.rows(), d = x.cols();
  auto delta = [t_max, d](const RowMatrix& in) {
    RowMatrix out(t_max, d);
    auto at = [&](Eigen::Index t) { return std::clamp<Eigen::Index>(t, 0, t_max - 1); };
    for (Eigen::Index t = 0; t < t_max; ++t) {
      for (Eigen::Index j = 0; j < d; ++j) {
        double num = 0.0;
        for (int k = 1; k <= 2; ++k) num += k * (in(at(t + k), j) - in(at(t - k), j));
        out(t, j) = num / 10.0;  // 2 * (1^2 + 2^2)
      }
    }
    return out;
  };
  FeatureMatrix out;
  out.kind = static_features.kind;
  out.frame_params = static_features.frame_params;
  out.values.resize(t_max, 3 * d);
  if (t_max == 0) return out;
  const RowMatrix d1 = delta(x);
  const RowMatrix d2 = delta(d1);
  out.values.leftCols(d) = x;
  out.values.middleCols(d, d) = d1;
  out.values.rightCols(d) = d2;
  return out;
}

FeatureMatrix Cmvn(const FeatureMatrix& features, double std_floor) {
  FeatureMatrix out = features;
  const Eigen::Index n = features.values.rows();
  if (n == 0) return out;
  for (Eigen::Index j = 0; j < features.values.cols(); ++j) {
    auto col = out.values.col(j);
    const double mean = col.mean();
    col.array() -= mean;
    if (n < 2) continue;
    const double sd = std::sqrt(col.squaredNorm() / static_cast<double>(n));
    if (sd < std_floor) {
      col.setZero();
    } else {
      col /= sd;
    }
  }
  return out;
}

FeatureMatrix ComputeFeatures(std::span<const float> audio, const FeatureOptions& options,
                              int rate) {
  const FeatureExtractor extractor(options, rate);
  return Cmvn(AddDeltas(extractor.Static(audio)));
}

std::string EncodeFeatures(const FeatureMatrix& f) {
  std::string out = "VKFT";
  PutU32(out, 1);
  PutU32(out, static_cast<uint32_t>(f.dims()));
  PutU32(out, static_cast<uint32_t>(f.frames()));
  PutU32(out, static_cast<uint32_t>(f.kind));
  PutF32(out, static_cast<float>(f.frame_params.window));
  PutF32(out, static_cast<float>(f.frame_params.hop));
  out.reserve(out.size() + 4 * f.values.size());
  for (Eigen::Index t = 0; t < f.values.rows(); ++t) {
    for (Eigen::Index j = 0; j < f.values.cols(); ++j) {
      PutF32(out, static_cast<float>(f.values(t, j)));
    }
  }
  return out;
}

FeatureMatrix DecodeFeatures(std::string_view bytes) {
  constexpr size_t kHeader = 28;
  if (bytes.size() < kHeader || bytes.substr(0, 4) != "VKFT") {
    throw VadError("feature file: bad magic");
  }
  if (GetU32(bytes, 4) != 1) throw VadError("feature file: unsupported version");
  const uint32_t dims = GetU32(bytes, 8);
  const uint32_t frames = GetU32(bytes, 12);
  const uint32_t kind = GetU32(bytes, 16);
  if (kind > 1) throw VadError("feature file: unknown kind");
  if (bytes.size() != kHeader + 4ull * dims * frames) {
    throw VadError("feature file: size does not match header");
  }
  FeatureMatrix f;
  f.kind = static_cast<FeatureKind>(kind);
  // Stored as float32; round to the millisecond grid the params came from.
  f.frame_params.window = std::round(GetF32(bytes, 20) * 1e6) / 1e6;
  f.frame_params.hop = std::round(GetF32(bytes, 24) * 1e6) / 1e6;
  f.values.resize(frames, dims);
  size_t pos = kHeader;
  for (uint32_t t = 0; t < frames; ++t) {
    for (uint32_t j = 0; j < dims; ++j, pos += 4) f.values(t, j) = GetF32(bytes, pos);
  }
  return f;
}

void WriteFeatureFile(const std::string& path, const FeatureMatrix& features,
                      const std::string& meta_json) {
  WriteFileAtomic(path, EncodeFeatures(features));
  WriteFileAtomic(path + ".meta", meta_json + "\n");
}

FeatureMatrix ReadFeatureFile(const std::string& path) {
  return DecodeFeatures(ReadFileToString(path));
}

}  // namespace vadkit
