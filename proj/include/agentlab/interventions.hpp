#pragma once
#include <string>
#include <vector>

#include "agentlab/training.hpp"

namespace agentlab {

// Evaluation-time causal manipulations applied to frozen checkpoints. A pass
// is an ordered list of specs; each knob may appear at most once.
enum class InterventionKind {
    None,
    SelfLesionZero,
    SelfBlindNoise,
    SelfBlindPermute,
    CapacityScale,
    SlotNoise,
    HiddenNoise,
};
std::string intervention_kind_name(InterventionKind k);
InterventionKind intervention_kind_from_name(const std::string& s);

struct InterventionSpec {
    InterventionKind kind = InterventionKind::None;
    double sigma = 0.0;           // SlotNoise / HiddenNoise magnitude
    double capacity_scale = 1.0;  // CapacityScale: fraction of live slots
    uint64_t stream = 0;          // rng stream tag the runner mixes with its seed
};

// Per-dimension moments and donor codes of the self latent over intact
// rollouts; consumed by the blind-noise and permute lesions.
struct SelfLesionCalibration {
    std::vector<double> mu, sd;
    std::vector<Tensor> pool;
};

// Pools the self latent at every step of `trials` intact autonomous episodes.
SelfLesionCalibration calibrate_self_lesion(Agent& agent, const TaskConfig& task, int trials,
                                            uint64_t seed);

// Folds a pass into eval overrides. `noise_rng` backs every sampling knob and
// `calib` must outlive the returned overrides (they point into it).
EvalOverrides apply_interventions(const std::vector<InterventionSpec>& specs, Rng* noise_rng,
                                  const SelfLesionCalibration* calib);

struct BusAuditReport {
    double t1_median = 0.0;     // median report-step Frobenius norm of dlogits/dslots
    double t3_flip_rate = 0.0;  // report answers flipped under trunk jitter
    int report_steps = 0;
    std::vector<double> t1_norms;  // one entry per audited report step
};

// T1 differentiates the report-step logits with respect to the slot block on a
// readout-only subgraph. T3 replays each episode with the recorded slot
// trajectory frozen and Gaussian jitter on the trunk embedding, driving the
// environment with the first pass's actions, and counts changed report answers.
BusAuditReport bus_audit(Agent& agent, const TaskConfig& task, int episodes, uint64_t seed,
                         double trunk_sigma = 0.1);

}  // namespace agentlab
