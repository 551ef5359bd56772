#pragma once

#include <optional>
#include <string>
#include <vector>

#include "semcom/config.hpp"
#include "semcom/rng.hpp"
#include "semcom/tensor.hpp"

namespace semcom {

enum class Split { train, test };

struct ImageShape {
  int h = 28, w = 28, c = 1;
};

// Labeled images, pixels in [0,1], stored NHWC.
struct LabeledImageSet {
  int n = 0;
  ImageShape shape;
  int num_classes = 0;
  std::vector<float> images;  // n * h * w * c
  std::vector<int> labels;    // n

  std::size_t image_size() const {
    return static_cast<std::size_t>(shape.h) * shape.w * shape.c;
  }
  const float* image(int i) const { return images.data() + i * image_size(); }

  // Batch as NCHW tensor for the conv stack.
  Tensor batch_nchw(const std::vector<int>& indices) const;
  std::vector<int> batch_labels(const std::vector<int>& indices) const;
};

// Dataset root comes from `data_root`, else env SEMCOM_DATA_ROOT, else "./data".
std::string dataset_root(const std::string& override_root = "");

// mnist/cifar10 read the standard distribution files; missing files raise a
// DataError whose message says exactly what to download and where to put it.
LabeledImageSet load_dataset(DatasetName name, Split split,
                             std::optional<int> subset_size, Stream& rng,
                             const std::string& data_root = "");

// Procedural stand-in: 10 distinct geometric templates plus bounded pixel
// noise; linearly separable at noise 0.
LabeledImageSet make_synthetic(int num_samples, ImageShape shape, int num_classes,
                               Stream& rng, double noise_amplitude = 0.1);

// Class-balanced random subset; per-class counts differ by at most 1.
LabeledImageSet balanced_subset(const LabeledImageSet& set, int size, Stream& rng);

// Noise-free class template, used by tests as a nearest-template oracle.
std::vector<float> synthetic_template(int cls, ImageShape shape);

// Epoch-deterministic batch order.
class BatchIterator {
 public:
  BatchIterator(int n, int batch_size, Stream& shuffle_stream);
  // Shuffles for the given epoch and resets.
  void start_epoch();
  bool next(std::vector<int>& indices_out);

 private:
  int n_, batch_;
  std::size_t pos_ = 0;
  std::vector<int> order_;
  Stream* stream_;
};

}  // namespace semcom
