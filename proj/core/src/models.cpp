#include "semcom/models.hpp"

namespace semcom {

std::string to_string(TrainingMode m) {
  switch (m) {
    case TrainingMode::untrained: return "untrained";
    case TrainingMode::baseline: return "baseline";
    case TrainingMode::minmax: return "minmax";
    case TrainingMode::eve_only: return "eve_only";
  }
  return "?";
}

Sequential build_encoder(ImageShape shape, int latent_dim, double dropout,
                         Stream& init, Stream* drop) {
  if (latent_dim < 1) throw ConfigError("build_encoder: latent_dim must be >= 1");
  if (shape.h % 4 != 0 || shape.w % 4 != 0)
    throw ConfigError("build_encoder: image height/width must be divisible by 4");
  Sequential s;
  s.add<Conv2d>(shape.c, 64, init, "enc.conv1a");
  s.add<BatchNorm2d>(64, "enc.bn1a");
  s.add<ReLU>();
  s.add<Conv2d>(64, 64, init, "enc.conv1b");
  s.add<BatchNorm2d>(64, "enc.bn1b");
  s.add<ReLU>();
  s.add<MaxPool2>();
  s.add<Dropout>(dropout, drop);
  s.add<Conv2d>(64, 128, init, "enc.conv2a");
  s.add<BatchNorm2d>(128, "enc.bn2a");
  s.add<ReLU>();
  s.add<Conv2d>(128, 128, init, "enc.conv2b");
  s.add<BatchNorm2d>(128, "enc.bn2b");
  s.add<ReLU>();
  s.add<MaxPool2>();
  s.add<Dropout>(dropout, drop);
  const int flat = (shape.h / 4) * (shape.w / 4) * 128;
  s.add<Reshape>(std::vector<int>{flat});
  s.add<Dense>(flat, 1024, init, "enc.fc1");
  s.add<ReLU>();
  s.add<Dense>(1024, 2 * latent_dim, init, "enc.fc2");
  s.add<Reshape>(std::vector<int>{2, latent_dim});
  return s;
}

Sequential build_recon_decoder(int latent_dim, ImageShape shape, Stream& init) {
  if (shape.h % 4 != 0 || shape.w % 4 != 0)
    throw ConfigError("build_recon_decoder: image height/width must be divisible by 4");
  const int h4 = shape.h / 4, w4 = shape.w / 4;
  Sequential s;
  s.add<Reshape>(std::vector<int>{2 * latent_dim});
  s.add<Dense>(2 * latent_dim, 1024, init, "rec.fc1");
  s.add<ReLU>();
  s.add<Dense>(1024, h4 * w4 * 256, init, "rec.fc2");
  s.add<Reshape>(std::vector<int>{256, h4, w4});
  s.add<ConvTranspose2d>(256, 128, init, "rec.up1");
  s.add<BatchNorm2d>(128, "rec.bn1");
  s.add<ReLU>();
  s.add<ConvTranspose2d>(128, 64, init, "rec.up2");
  s.add<BatchNorm2d>(64, "rec.bn2");
  s.add<ReLU>();
  s.add<Conv2d>(64, shape.c, init, "rec.out");
  s.add<Sigmoid>();
  return s;
}

Sequential build_semantic_classifier(int latent_dim, int num_classes, double dropout,
                                     Stream& init, Stream* drop, const std::string& name) {
  Sequential s;
  s.add<Reshape>(std::vector<int>{2 * latent_dim});
  s.add<Dense>(2 * latent_dim, 512, init, name + ".fc1");
  s.add<ReLU>();
  s.add<Dropout>(dropout, drop);
  s.add<Dense>(512, 256, init, name + ".fc2");
  s.add<ReLU>();
  s.add<Dropout>(dropout, drop);
  s.add<Dense>(256, num_classes, init, name + ".out");
  return s;
}

ModelBundle build_bundle(const ExperimentConfig& cfg, ImageShape shape, int num_classes,
                         RandomStreams& streams) {
  Stream& init = streams.get("init");
  Stream* drop = &streams.get("dropout");
  ModelBundle b;
  b.shape = shape;
  b.latent_dim = cfg.latent_dim;
  b.num_classes = num_classes;
  b.config_hash = config_hash(cfg);
  b.encoder = build_encoder(shape, cfg.latent_dim, cfg.dropout_conv, init, drop);
  b.recon = build_recon_decoder(cfg.latent_dim, shape, init);
  b.bob_cls = build_semantic_classifier(cfg.latent_dim, num_classes, cfg.dropout_cls,
                                        init, drop, "bob");
  // Eve draws dropout from its own stream so min-max phase A cannot perturb
  // the legitimate pair's randomness (w_p=0 must reproduce train_baseline).
  b.eve_cls = build_semantic_classifier(cfg.latent_dim, num_classes, cfg.dropout_cls,
                                        init, &streams.get("eve_dropout"), "eve");
  return b;
}

}  // namespace semcom
