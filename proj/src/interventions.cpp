#include "agentlab/interventions.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace agentlab {

std::string intervention_kind_name(InterventionKind k) {
    switch (k) {
        case InterventionKind::None: return "none";
        case InterventionKind::SelfLesionZero: return "self_lesion_zero";
        case InterventionKind::SelfBlindNoise: return "self_blind_noise";
        case InterventionKind::SelfBlindPermute: return "self_blind_permute";
        case InterventionKind::CapacityScale: return "capacity_scale";
        case InterventionKind::SlotNoise: return "slot_noise";
        case InterventionKind::HiddenNoise: return "hidden_noise";
    }
    return "?";
}

InterventionKind intervention_kind_from_name(const std::string& s) {
    for (InterventionKind k :
         {InterventionKind::None, InterventionKind::SelfLesionZero, InterventionKind::SelfBlindNoise,
          InterventionKind::SelfBlindPermute, InterventionKind::CapacityScale,
          InterventionKind::SlotNoise, InterventionKind::HiddenNoise})
        if (intervention_kind_name(k) == s) return k;
    throw std::runtime_error("unknown intervention kind '" + s + "'");
}

SelfLesionCalibration calibrate_self_lesion(Agent& agent, const TaskConfig& task, int trials,
                                            uint64_t seed) {
    if (!arch_has_self_model(agent.config().arch))
        throw std::runtime_error("self-lesion calibration requires a self latent");
    if (trials <= 0) throw std::runtime_error("calibration needs at least one trial");
    Graph g(&agent.params());
    GridEnv env(task);
    Rng env_rng(hash_tags(seed, {0xca11bULL}));
    EvalOverrides intact;
    SelfLesionCalibration cal;
    for (int e = 0; e < trials; ++e) {
        EpisodeRecord rec = run_episode_autonomous(agent, g, env, env_rng, intact);
        for (const auto& o : rec.steps) cal.pool.push_back(o.z_self);
    }
    cal.mu.assign(kZSelfDim, 0.0);
    cal.sd.assign(kZSelfDim, 0.0);
    const double n = static_cast<double>(cal.pool.size());
    for (const auto& z : cal.pool)
        for (int i = 0; i < kZSelfDim; ++i) cal.mu[i] += z.data[i];
    for (auto& m : cal.mu) m /= n;
    for (const auto& z : cal.pool)
        for (int i = 0; i < kZSelfDim; ++i) {
            const double d = z.data[i] - cal.mu[i];
            cal.sd[i] += d * d;
        }
    for (auto& s : cal.sd) s = std::sqrt(s / n);
    return cal;
}

EvalOverrides apply_interventions(const std::vector<InterventionSpec>& specs, Rng* noise_rng,
                                  const SelfLesionCalibration* calib) {
    EvalOverrides ov;
    bool self_set = false, cap_set = false, slot_set = false, hid_set = false;
    for (const auto& sp : specs) {
        if (sp.sigma < 0.0) throw std::runtime_error("intervention sigma must be >= 0");
        switch (sp.kind) {
            case InterventionKind::None:
                break;
            case InterventionKind::SelfLesionZero:
            case InterventionKind::SelfBlindNoise:
            case InterventionKind::SelfBlindPermute:
                if (self_set) throw std::runtime_error("duplicate self-lesion intervention");
                self_set = true;
                if (sp.kind == InterventionKind::SelfLesionZero) {
                    ov.self_lesion = SelfLesion::Zero;
                } else if (sp.kind == InterventionKind::SelfBlindNoise) {
                    if (!calib)
                        throw std::runtime_error("blind-noise lesion needs a calibration run");
                    ov.self_lesion = SelfLesion::Noise;
                    ov.lesion_mu = &calib->mu;
                    ov.lesion_sd = &calib->sd;
                } else {
                    if (!calib) throw std::runtime_error("permute lesion needs a calibration run");
                    ov.self_lesion = SelfLesion::Permute;
                    ov.permute_pool = &calib->pool;
                }
                break;
            case InterventionKind::CapacityScale:
                if (cap_set) throw std::runtime_error("duplicate capacity intervention");
                if (sp.capacity_scale < 0.0 || sp.capacity_scale > 1.0)
                    throw std::runtime_error("capacity scale must be in [0,1]");
                cap_set = true;
                ov.capacity_scale = sp.capacity_scale;
                break;
            case InterventionKind::SlotNoise:
                if (slot_set) throw std::runtime_error("duplicate slot-noise intervention");
                slot_set = true;
                ov.slot_noise = sp.sigma;
                break;
            case InterventionKind::HiddenNoise:
                if (hid_set) throw std::runtime_error("duplicate hidden-noise intervention");
                hid_set = true;
                ov.hidden_noise = sp.sigma;
                break;
        }
    }
    ov.noise_rng = noise_rng;
    return ov;
}

namespace {

double median_of(std::vector<double> v) {
    if (v.empty()) return 0.0;
    std::sort(v.begin(), v.end());
    const size_t n = v.size();
    return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

// Frobenius norm of the report-step Jacobian dlogits/dslots, one backward
// sweep per action row on a fresh readout-only subgraph.
double slot_jacobian_norm(Agent& agent, const AgentStepOutput& o) {
    double sq = 0.0;
    for (int act = 0; act < kNumActions; ++act) {
        Graph g(&agent.params());
        std::vector<int> slot_in(kSlots);
        for (int k = 0; k < kSlots; ++k) {
            Tensor sl = Tensor::zeros({kSlotDim});
            for (int i = 0; i < kSlotDim; ++i) sl.data[i] = o.slots_flat.data[k * kSlotDim + i];
            slot_in[k] = g.input(sl);
        }
        int logits = agent.build_readout(g, o.h, slot_in, o.occupied, kSlots,
                                         agent.config().routing);
        Tensor row = Tensor::zeros({1, kNumActions});
        row.data[act] = 1.0;
        int pick = g.affine(logits, g.constant(row), g.constant(Tensor::zeros({1})));
        g.backward(pick);
        for (int k = 0; k < kSlots; ++k) {
            if (!g.grad_live(slot_in[k])) continue;
            for (double v : g.grad(slot_in[k]).data) sq += v * v;
        }
    }
    agent.params().zero_grads();
    return std::sqrt(sq);
}

}  // namespace

BusAuditReport bus_audit(Agent& agent, const TaskConfig& task, int episodes, uint64_t seed,
                         double trunk_sigma) {
    if (!arch_has_workspace(agent.config().arch))
        throw std::runtime_error("bus audit requires a workspace architecture");
    BusAuditReport rep;
    Graph g(&agent.params());
    int flips = 0, decisions = 0;
    for (int e = 0; e < episodes; ++e) {
        Rng env_rng(hash_tags(seed, {0xb5a0d17ULL, static_cast<uint64_t>(e)}));
        Rng env_rng_replay = env_rng;  // identical draws -> identical episode script
        GridEnv env(task);
        EvalOverrides intact;
        EpisodeRecord rec = run_episode_autonomous(agent, g, env, env_rng, intact);

        for (int t = 0; t < rec.length(); ++t)
            if (rec.infos[t].report_step)
                rep.t1_norms.push_back(slot_jacobian_norm(agent, rec.steps[t]));

        // second pass: slots pinned to the recorded trajectory, trunk jittered,
        // environment driven by the first pass's actions
        std::vector<Tensor> frozen;
        std::vector<std::vector<bool>> focc;
        frozen.reserve(rec.length());
        focc.reserve(rec.length());
        for (const auto& o : rec.steps) {
            frozen.push_back(o.slots_flat);
            focc.push_back(o.occupied);
        }
        GridEnv env_b(task);
        ObsTensor obs = env_b.reset(env_rng_replay);
        Rng jitter(hash_tags(seed, {0x7a0bULL, static_cast<uint64_t>(e)}));
        EvalOverrides ovb;
        ovb.frozen_slots = &frozen;
        ovb.frozen_occupied = &focc;
        ovb.embed_noise = trunk_sigma;
        ovb.noise_rng = &jitter;
        g.reset();
        agent.begin_episode(g);
        for (int t = 0; t < rec.length(); ++t) {
            AgentStepOutput ob = agent.step(obs, ovb);
            if (rec.infos[t].report_step) {
                ++decisions;
                if (ob.action != rec.steps[t].action) ++flips;
            }
            StepOutcome so = env_b.step(rec.steps[t].action);
            if (!so.done) obs = so.obs;
        }
    }
    rep.report_steps = decisions;
    rep.t3_flip_rate = decisions > 0 ? static_cast<double>(flips) / decisions : 0.0;
    rep.t1_median = median_of(rep.t1_norms);
    return rep;
}

}  // namespace agentlab
