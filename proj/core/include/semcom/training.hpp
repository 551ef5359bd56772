#pragma once

#include <string>
#include <vector>

#include "semcom/config.hpp"
#include "semcom/dataset.hpp"
#include "semcom/models.hpp"

namespace semcom {

struct CurvePoint {
  int epoch = 0;
  std::string phase;  // baseline | minmax | eve
  double snr_db = 0;  // Eve evaluation SNR for minmax, link SNR otherwise
  double bob_acc = 0, eve_acc = 0, bob_loss = 0, eve_cce = 0, psnr = 0, ssim = 0;
};
using TrainingCurve = std::vector<CurvePoint>;

void write_metrics_csv(const TrainingCurve& curve, const std::string& path);

struct TrainResult {
  ModelBundle bundle;
  TrainingCurve curve;
};

// Multi-task training of Alice+Bob over the fading channel with per-block
// uniform SNR randomization. w_p is ignored.
TrainResult train_baseline(const ExperimentConfig& cfg, const LabeledImageSet& train,
                           const LabeledImageSet& test, RandomStreams& streams);

// Alternating min-max: per round, k_E batches update Eve only (encoder frozen,
// eval mode), then k_L batches update encoder+Bob against the frozen Eve with
// the privacy term -w_p * eve_cce on an independent Eve-channel draw. With
// w_p = 0 the legitimate trajectory is bitwise identical to train_baseline.
TrainResult train_minmax(const ExperimentConfig& cfg, const LabeledImageSet& train,
                         const LabeledImageSet& test, RandomStreams& streams);

// Best-response Eve against the bundle's frozen encoder; only eve_cls moves.
// epochs overrides cfg.epochs when >= 0.
void train_eve(ModelBundle& bundle, const ExperimentConfig& cfg,
               const LabeledImageSet& train, RandomStreams& streams, int epochs = -1);

}  // namespace semcom
