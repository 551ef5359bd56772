#pragma once

#include <functional>

#include "semcom/channel.hpp"
#include "semcom/config.hpp"
#include "semcom/evaluation.hpp"
#include "semcom/models.hpp"

namespace semcom {

// Untargeted single-step sign attack on Eve's inference loss. The gradient is
// averaged over spec.grad_realizations sampled Eve-channel draws at
// eve_snr_db (the SNR the jammer assumes for Eve). Every element of
// the returned delta is in {-epsilon, 0, +epsilon}.
LatentSignal fgsm_perturb(Sequential& eve_model, const LatentSignal& x,
                          const std::vector<int>& labels, const PerturbationConfig& spec,
                          double eve_snr_db, RandomStreams& streams);

// Iterative sign ascent with projection onto the elementwise epsilon box after
// every step; deterministic zero start.
LatentSignal pgd_perturb(Sequential& eve_model, const LatentSignal& x,
                         const std::vector<int>& labels, const PerturbationConfig& spec,
                         double eve_snr_db, RandomStreams& streams);

// Crafts a perturbation for one batch; zero_delta_fn disables protection.
using DeltaFn = std::function<LatentSignal(Sequential& eve_model, const LatentSignal& x,
                                           const std::vector<int>& labels,
                                           double eve_snr_db, RandomStreams& streams)>;

DeltaFn zero_delta_fn();
DeltaFn make_delta_fn(const PerturbationConfig& spec);

// Superposed reception: Bob at bob_snr_db (default 10 dB), Eve swept over
// eval_snrs. The jammer is co-located with the source, so toward each
// receiver the perturbation rides the same fading draw as the signal (Bob's
// and Eve's channels still differ); the optional gains scale the jammer's
// power on each link. Requires a trained Eve.
EvalReport evaluate_with_jammer(ModelBundle& bundle, const DeltaFn& delta_fn,
                                const LabeledImageSet& data,
                                const std::vector<double>& eval_snrs, int n_real,
                                RandomStreams& streams, const ExperimentConfig& cfg,
                                double bob_snr_db = 10.0, double jammer_bob_gain = 1.0,
                                double jammer_eve_gain = 1.0,
                                const std::string& perturb_tag = "none");

}  // namespace semcom
