// vadkit/features.h

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

// 39-dimensional MFCC / GFCC front ends: 12 cepstra + log energy, with
// regression deltas and per-utterance mean/variance normalisation.

#ifndef VADKIT_FEATURES_H_
#define VADKIT_FEATURES_H_

#include <Eigen/Dense>

#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "vadkit/corpus.h"

namespace vadkit {

enum class FeatureKind : uint32_t { kMfcc = 0, kGfcc = 1 };

std::string_view FeatureKindName(FeatureKind kind);
std::optional<FeatureKind> ParseFeatureKind(std::string_view name);

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

struct FeatureMatrix {
  RowMatrix values;  // frames x dims
  FrameParams frame_params;
  FeatureKind kind = FeatureKind::kMfcc;

  int64_t frames() const { return values.rows(); }
  int64_t dims() const { return values.cols(); }
};

struct FeatureOptions {
  FeatureKind kind = FeatureKind::kMfcc;
  FrameParams frame_params;
  double preemphasis = 0.97;
  int num_filters = 24;  // 24 mel, 64 gammatone
  int fft_size = 512;
  double f_low = 50.0;
  double f_high = 0.0;  // 0 = Nyquist
  int num_ceps = 12;
  double log_floor = 1e-10;

  static FeatureOptions Mfcc();
  static FeatureOptions Gfcc(int num_filters = 64);
  void Validate(int rate = kSampleRate) const;
};

inline constexpr int kStaticDims = 13;
inline constexpr int kFeatureDims = 39;

/// y[0] = x[0], y[n] = x[n] - coeff * x[n-1].
std::vector<float> Preemphasis(std::span<const float> x, double coeff = 0.97);

double HzToMel(double hz);
double MelToHz(double mel);
double HzToErb(double hz);  // 21.4 log10(0.00437 f + 1)
double ErbToHz(double erb);

/// hz2erb(f_high) - hz2erb(f_low), rounded: the cochlear-spacing filter count.
int ErbFilterCount(double f_low, double f_high);

std::vector<double> MelCenterFrequencies(int num_filters, double f_low, double f_high);
std::vector<double> ErbCenterFrequencies(int num_filters, double f_low, double f_high);

/// num_filters x (fft_size/2 + 1). Triangles are normalised to unit area.
Eigen::MatrixXd MelFilterbank(int num_filters, int fft_size, int rate, double f_low,
                              double f_high);
/// 4th-order gammatone magnitude responses sampled at the FFT bin centres.
Eigen::MatrixXd GammatoneFilterbank(int num_filters, int fft_size, int rate,
                                    double f_low, double f_high);

/// Orthonormal DCT-II, n x n.
Eigen::MatrixXd DctMatrix(int n);

/// Per-frame spectral analysis. Thread-safe; Static() splits frames across
/// OpenMP threads and gives bit-identical output to StaticSerial().
class FeatureExtractor {
 public:
  explicit FeatureExtractor(const FeatureOptions& options, int rate = kSampleRate);
  ~FeatureExtractor();
  FeatureExtractor(const FeatureExtractor&) = delete;
  FeatureExtractor& operator=(const FeatureExtractor&) = delete;

  /// frames x 13: [C1..C12, log energy].
  FeatureMatrix Static(std::span<const float> audio) const;
  FeatureMatrix StaticSerial(std::span<const float> audio) const;

  /// frames x num_filters filterbank energies before the log.
  Eigen::MatrixXd FilterbankEnergies(std::span<const float> audio) const;

  const Eigen::MatrixXd& filterbank() const { return filterbank_; }
  const FeatureOptions& options() const { return options_; }

 private:
  struct Fft;
  void FrameRow(std::span<const float> emph, int64_t frame, Fft& fft, double* row,
                double* fbank_out) const;

  FeatureOptions options_;
  int rate_;
  int win_;
  int hop_;
  std::vector<double> window_;
  Eigen::MatrixXd filterbank_;
  Eigen::MatrixXd dct_;
  std::unique_ptr<Fft> plan_;
};

/// Appends regression deltas (window +/-2, edge frames replicated) and
/// delta-deltas: [static | delta | delta-delta].
FeatureMatrix AddDeltas(const FeatureMatrix& static_features);

/// Per-dimension (x - mean) / std. Dimensions whose std falls below the
/// floor are centred to zero; a single frame is mean-normalised only.
FeatureMatrix Cmvn(const FeatureMatrix& features, double std_floor = 1e-8);

/// Static -> deltas -> CMVN, frame-aligned with FrameLabels of the audio.
FeatureMatrix ComputeFeatures(std::span<const float> audio, const FeatureOptions& options,
                              int rate = kSampleRate);

/// Binary container: "VKFT", u32 version, u32 dims, u32 frames, u32 kind,
/// f32 window, f32 hop, then row-major little-endian float32 values.
std::string EncodeFeatures(const FeatureMatrix& features);
FeatureMatrix DecodeFeatures(std::string_view bytes);
void WriteFeatureFile(const std::string& path, const FeatureMatrix& features,
                      const std::string& meta_json);
FeatureMatrix ReadFeatureFile(const std::string& path);

}  // namespace vadkit

#endif  // VADKIT_FEATURES_H_
