#pragma once
#include <memory>
#include <string>
#include <vector>

#include "agentlab/agents.hpp"
#include "agentlab/env.hpp"

namespace agentlab {

// One evaluated episode: everything the metrics need, nothing more.
struct EpisodeRecord {
    EpisodeScript script;
    std::vector<AgentStepOutput> steps;
    std::vector<StepInfo> infos;
    std::vector<double> rewards;

    int length() const { return static_cast<int>(steps.size()); }
    bool report_correct(int t) const {
        return infos[t].report_step && steps[t].action == infos[t].truth_action;
    }
    // all report steps answered correctly (and at least one exists)
    bool conjunction_correct() const {
        bool any = false;
        for (int t = 0; t < length(); ++t) {
            if (!infos[t].report_step) continue;
            any = true;
            if (steps[t].action != infos[t].truth_action) return false;
        }
        return any;
    }
    double total_reward() const {
        double s = 0.0;
        for (double r : rewards) s += r;
        return s;
    }
};

// Agent drives the environment with its own actions (confidence forwarded on
// wager steps).
EpisodeRecord run_episode_autonomous(Agent& a, Graph& g, GridEnv& env, Rng& env_rng,
                                     const EvalOverrides& ov);

struct TrainConfig {
    TaskConfig task;
    AgentConfig agent;
    int episodes = 4000;
    int heldout_episodes = 200;
    double imitation_gate = 0.95;
    double meta_coeff = 0.0;  // confidence-calibration objective at report steps
    double aux_coeff = 0.0;   // stimulus probe objective on the raw slot block
    AdamConfig adam;
    uint64_t seed = 0;
    int log_every = 100;
};

struct TrainReport {
    double heldout_step_accuracy = 0.0;    // action == oracle action, all steps
    double heldout_report_accuracy = 0.0;  // correct answers at report steps
    bool gate_passed = false;
    int episodes_run = 0;
    std::vector<std::string> log_csv;  // header + one row per log_every episodes
};

class Trainer {
public:
    explicit Trainer(const TrainConfig& cfg);

    Agent& agent() { return *agent_; }
    const TrainConfig& config() const { return cfg_; }
    int episode_index() const { return episode_; }
    const std::vector<std::string>& log_csv() const { return log_csv_; }

    // Trains n more episodes (teacher forcing, one optimizer update each).
    void train(int n);
    // Autonomous heldout evaluation; does not advance training streams.
    TrainReport validate();
    // train(all remaining) + validate().
    TrainReport run();

    // Full training state (parameters, optimizer moments, streams, progress);
    // loading resumes bit-exactly.
    std::string save_state() const;
    static Trainer load_state(const std::string& text);

private:
    double train_one_episode();

    TrainConfig cfg_;
    std::unique_ptr<Agent> agent_;
    Graph graph_;
    Adam opt_;
    Rng env_rng_, train_rng_;
    int episode_ = 0;
    double loss_acc_ = 0.0;
    long match_acc_ = 0, step_acc_ = 0;
    std::vector<std::string> log_csv_;
};

}  // namespace agentlab
