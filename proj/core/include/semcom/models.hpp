#pragma once

#include <string>

#include "semcom/config.hpp"
#include "semcom/dataset.hpp"
#include "semcom/nn.hpp"

namespace semcom {

enum class TrainingMode { untrained, baseline, minmax, eve_only };
std::string to_string(TrainingMode m);

// Two conv stages (64 then 128 channels, each /2 pooled) and a 1024-unit
// projection head emitting the concatenated I/Q vector [B, 2*latent_dim].
Sequential build_encoder(ImageShape shape, int latent_dim, double dropout,
                         Stream& init, Stream* dropout_stream);

// Dense expansion to a quarter-resolution 256-channel map, two 2x transposed
// conv blocks, final conv + sigmoid back to the image shape.
Sequential build_recon_decoder(int latent_dim, ImageShape shape, Stream& init);

// Feed-forward head on the flattened I/Q vector: 2d -> 512 -> 256 -> classes.
Sequential build_semantic_classifier(int latent_dim, int num_classes, double dropout,
                                     Stream& init, Stream* dropout_stream,
                                     const std::string& name);

// Encoder + reconstruction decoder + Bob classifier + Eve classifier. Eve uses
// the identical classifier architecture as Bob.
struct ModelBundle {
  Sequential encoder, recon, bob_cls, eve_cls;
  ImageShape shape;
  int latent_dim = 0;
  int num_classes = 0;
  std::string config_hash;
  TrainingMode mode = TrainingMode::untrained;
  bool eve_trained = false;
};

ModelBundle build_bundle(const ExperimentConfig& cfg, ImageShape shape, int num_classes,
                         RandomStreams& streams);

// Checkpoints store all four parameter sets plus the config hash; partial
// bundles or hash mismatches are rejected at load.
void save_checkpoint(const ModelBundle& bundle, const std::string& path);
ModelBundle load_checkpoint(const std::string& path, const ExperimentConfig& cfg,
                            RandomStreams& streams);

}  // namespace semcom
