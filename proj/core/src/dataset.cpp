#include "semcom/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>

namespace semcom {
namespace {

std::uint32_t read_be32(std::istream& s) {
  unsigned char b[4];
  s.read(reinterpret_cast<char*>(b), 4);
  return (std::uint32_t(b[0]) << 24) | (std::uint32_t(b[1]) << 16) |
         (std::uint32_t(b[2]) << 8) | std::uint32_t(b[3]);
}

[[noreturn]] void missing_files(const std::string& what, const std::string& dir,
                                const std::string& fetch) {
  throw DataError("missing " + what + " files under '" + dir +
                  "'. Fetch instructions: " + fetch);
}

LabeledImageSet load_mnist(Split split, const std::string& root) {
  namespace fs = std::filesystem;
  std::string dir = (fs::path(root) / "mnist").string();
  std::string img = split == Split::train ? "train-images-idx3-ubyte" : "t10k-images-idx3-ubyte";
  std::string lbl = split == Split::train ? "train-labels-idx1-ubyte" : "t10k-labels-idx1-ubyte";
  std::ifstream fi(fs::path(dir) / img, std::ios::binary);
  std::ifstream fl(fs::path(dir) / lbl, std::ios::binary);
  if (!fi || !fl)
    missing_files("MNIST", dir,
                  "download the four IDX files (train-images-idx3-ubyte, "
                  "train-labels-idx1-ubyte, t10k-images-idx3-ubyte, "
                  "t10k-labels-idx1-ubyte), gunzip them, and place them in that "
                  "directory");

  if (read_be32(fi) != 2051) throw DataError("bad MNIST image magic in " + img);
  std::uint32_t n = read_be32(fi), h = read_be32(fi), w = read_be32(fi);
  if (read_be32(fl) != 2049) throw DataError("bad MNIST label magic in " + lbl);
  std::uint32_t nl = read_be32(fl);
  if (n != nl) throw DataError("MNIST image/label count mismatch");

  LabeledImageSet set;
  set.n = static_cast<int>(n);
  set.shape = {static_cast<int>(h), static_cast<int>(w), 1};
  set.num_classes = 10;
  set.images.resize(std::size_t(n) * h * w);
  set.labels.resize(n);
  std::vector<unsigned char> buf(std::size_t(n) * h * w);
  fi.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
  if (!fi) throw DataError("truncated MNIST image file " + img);
  for (std::size_t i = 0; i < buf.size(); ++i) set.images[i] = buf[i] / 255.0f;
  std::vector<unsigned char> lab(n);
  fl.read(reinterpret_cast<char*>(lab.data()), n);
  if (!fl) throw DataError("truncated MNIST label file " + lbl);
  for (std::uint32_t i = 0; i < n; ++i) set.labels[i] = lab[i];
  return set;
}

LabeledImageSet load_cifar10(Split split, const std::string& root) {
  namespace fs = std::filesystem;
  std::string dir = (fs::path(root) / "cifar-10-batches-bin").string();
  std::vector<std::string> files;
  if (split == Split::train)
    for (int i = 1; i <= 5; ++i) files.push_back("data_batch_" + std::to_string(i) + ".bin");
  else
    files.push_back("test_batch.bin");

  LabeledImageSet set;
  set.shape = {32, 32, 3};
  set.num_classes = 10;
  constexpr int kRec = 1 + 3072;
  for (const auto& name : files) {
    std::ifstream f(fs::path(dir) / name, std::ios::binary);
    if (!f)
      missing_files("CIFAR-10", dir,
                    "download cifar-10-binary.tar.gz (the binary version), "
                    "extract it, and place the cifar-10-batches-bin directory "
                    "under the dataset root");
    std::vector<unsigned char> rec(kRec);
    while (f.read(reinterpret_cast<char*>(rec.data()), kRec)) {
      set.labels.push_back(rec[0]);
      // file stores CHW planes; convert to HWC
      std::size_t base = set.images.size();
      set.images.resize(base + 3072);
      for (int y = 0; y < 32; ++y)
        for (int x = 0; x < 32; ++x)
          for (int ch = 0; ch < 3; ++ch)
            set.images[base + (std::size_t(y) * 32 + x) * 3 + ch] =
                rec[1 + ch * 1024 + y * 32 + x] / 255.0f;
      ++set.n;
    }
  }
  return set;
}

}  // namespace

std::string dataset_root(const std::string& override_root) {
  if (!override_root.empty()) return override_root;
  if (const char* env = std::getenv("SEMCOM_DATA_ROOT")) return env;
  return "./data";
}

Tensor LabeledImageSet::batch_nchw(const std::vector<int>& indices) const {
  const int H = shape.h, W = shape.w, C = shape.c;
  Tensor t({static_cast<int>(indices.size()), C, H, W});
  float* dst = t.data();
  for (std::size_t b = 0; b < indices.size(); ++b) {
    const float* src = image(indices[b]);
    for (int ch = 0; ch < C; ++ch)
      for (int y = 0; y < H; ++y)
        for (int x = 0; x < W; ++x)
          dst[((b * C + ch) * H + y) * W + x] = src[(std::size_t(y) * W + x) * C + ch];
  }
  return t;
}

std::vector<int> LabeledImageSet::batch_labels(const std::vector<int>& indices) const {
  std::vector<int> out(indices.size());
  for (std::size_t i = 0; i < indices.size(); ++i) out[i] = labels[indices[i]];
  return out;
}

std::vector<float> synthetic_template(int cls, ImageShape shape) {
  const int H = shape.h, W = shape.w, C = shape.c;
  std::vector<float> img(std::size_t(H) * W * C, 0.1f);
  // class-dependent center on an irrational lattice so all classes differ
  double cy = (0.25 + 0.5 * std::fmod(cls * 0.37 + 0.11, 1.0)) * (H - 1);
  double cx = (0.25 + 0.5 * std::fmod(cls * 0.61 + 0.07, 1.0)) * (W - 1);
  double r = 0.18 * std::min(H, W);
  int kind = cls % 3;  // 0 disc, 1 cross, 2 square ring
  for (int y = 0; y < H; ++y) {
    for (int x = 0; x < W; ++x) {
      double dy = y - cy, dx = x - cx;
      bool on = false;
      switch (kind) {
        case 0: on = dy * dy + dx * dx <= r * r; break;
        case 1: on = (std::abs(dy) <= r / 3 && std::abs(dx) <= r) ||
                     (std::abs(dx) <= r / 3 && std::abs(dy) <= r);
                break;
        case 2: {
          double m = std::max(std::abs(dy), std::abs(dx));
          on = m <= r && m >= r * 0.5;
          break;
        }
      }
      if (on)
        for (int ch = 0; ch < C; ++ch)
          img[(std::size_t(y) * W + x) * C + ch] = 0.9f;
    }
  }
  return img;
}

LabeledImageSet make_synthetic(int num_samples, ImageShape shape, int num_classes,
                               Stream& rng, double noise_amplitude) {
  if (num_classes < 1 || num_classes > 10)
    throw DataError("make_synthetic: num_classes must be in [1,10]");
  LabeledImageSet set;
  set.n = num_samples;
  set.shape = shape;
  set.num_classes = num_classes;
  set.images.resize(std::size_t(num_samples) * set.image_size());
  set.labels.resize(num_samples);

  std::vector<std::vector<float>> tmpl(num_classes);
  for (int k = 0; k < num_classes; ++k) tmpl[k] = synthetic_template(k, shape);

  for (int i = 0; i < num_samples; ++i) {
    int cls = i % num_classes;  // balanced round-robin
    set.labels[i] = cls;
    float* dst = set.images.data() + std::size_t(i) * set.image_size();
    const auto& t = tmpl[cls];
    for (std::size_t p = 0; p < t.size(); ++p) {
      double v = t[p] + rng.uniform(-noise_amplitude, noise_amplitude);
      dst[p] = static_cast<float>(std::clamp(v, 0.0, 1.0));
    }
  }
  return set;
}

LabeledImageSet balanced_subset(const LabeledImageSet& set, int size, Stream& rng) {
  if (size > set.n)
    throw DataError("subset_size " + std::to_string(size) + " exceeds dataset size " +
                    std::to_string(set.n));
  std::vector<std::vector<int>> by_class(set.num_classes);
  for (int i = 0; i < set.n; ++i) by_class[set.labels[i]].push_back(i);
  for (auto& v : by_class) rng.shuffle(v.begin(), v.end());

  // size = q*K + r: r classes get one extra; which classes is a random draw
  int K = set.num_classes;
  int q = size / K, r = size % K;
  std::vector<int> extra(K, 0);
  std::vector<int> cls_order(K);
  for (int k = 0; k < K; ++k) cls_order[k] = k;
  rng.shuffle(cls_order.begin(), cls_order.end());
  for (int j = 0; j < r; ++j) extra[cls_order[j]] = 1;

  std::vector<int> pick;
  for (int k = 0; k < K; ++k) {
    int want = q + extra[k];
    if (want > static_cast<int>(by_class[k].size()))
      throw DataError("not enough samples of class " + std::to_string(k) +
                      " for a balanced subset of " + std::to_string(size));
    pick.insert(pick.end(), by_class[k].begin(), by_class[k].begin() + want);
  }
  rng.shuffle(pick.begin(), pick.end());

  LabeledImageSet out;
  out.n = size;
  out.shape = set.shape;
  out.num_classes = set.num_classes;
  out.images.resize(std::size_t(size) * set.image_size());
  out.labels.resize(size);
  for (int i = 0; i < size; ++i) {
    std::memcpy(out.images.data() + std::size_t(i) * set.image_size(), set.image(pick[i]),
                set.image_size() * sizeof(float));
    out.labels[i] = set.labels[pick[i]];
  }
  return out;
}

LabeledImageSet load_dataset(DatasetName name, Split split,
                             std::optional<int> subset_size, Stream& rng,
                             const std::string& data_root) {
  LabeledImageSet set;
  switch (name) {
    case DatasetName::mnist:
      set = load_mnist(split, dataset_root(data_root));
      break;
    case DatasetName::cifar10:
      set = load_cifar10(split, dataset_root(data_root));
      break;
    case DatasetName::synthetic: {
      int n = subset_size.value_or(split == Split::train ? 640 : 160);
      // distinct noise draws for train and test
      Stream derived(mix_seed(static_cast<std::uint64_t>(rng.integer(UINT64_MAX - 1)) ^
                              (split == Split::train ? 0x7261696eULL : 0x74657374ULL)));
      return make_synthetic(n, {28, 28, 1}, 10, derived);
    }
  }
  if (subset_size) return balanced_subset(set, *subset_size, rng);
  return set;
}

BatchIterator::BatchIterator(int n, int batch_size, Stream& shuffle_stream)
    : n_(n), batch_(batch_size), stream_(&shuffle_stream) {
  order_.resize(n);
  for (int i = 0; i < n; ++i) order_[i] = i;
}

void BatchIterator::start_epoch() {
  stream_->shuffle(order_.begin(), order_.end());
  pos_ = 0;
}

bool BatchIterator::next(std::vector<int>& out) {
  if (pos_ >= order_.size()) return false;
  std::size_t end = std::min(pos_ + static_cast<std::size_t>(batch_), order_.size());
  out.assign(order_.begin() + pos_, order_.begin() + end);
  pos_ = end;
  return true;
}

}  // namespace semcom
