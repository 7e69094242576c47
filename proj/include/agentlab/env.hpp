#pragma once
#include <string>
#include <vector>

#include "agentlab/rng.hpp"
#include "agentlab/tensor.hpp"

namespace agentlab {

// Grid object ids (observation channel 0)
constexpr int kObjEmpty = 0;
constexpr int kObjWall = 1;
constexpr int kObjGoal = 2;
constexpr int kObjPanel = 3;
constexpr int kObjAgent = 4;
constexpr int kObjZoneA = 5;
constexpr int kObjZoneB = 6;

// Panel symbol codes (observation channel 1 at the panel cell; index into the
// 16-dim cue vector consumed by the workspace write path).
constexpr int kCueDim = 16;
constexpr int kCodeBlank = 0;
constexpr int kCodeColor0 = 1;    // 1..4  secondary (color) cues
constexpr int kCodeObject0 = 5;   // 5..8  primary (object) cues
constexpr int kCodeReport1 = 9;   // early report flag; doubles as the wager prompt
constexpr int kCodeReport2 = 10;  // late report flag
constexpr int kCodeMaskA = 11;
constexpr int kCodeMaskB = 12;
constexpr int kCodeStim0 = 13;    // wagering stimulus s=0
constexpr int kCodeStim1 = 14;    // wagering stimulus s=1
constexpr int kCodeDecision = 15; // wagering decision flag

constexpr int kNumCueValues = 4;       // values per cue family
constexpr int kFirstReportAction = 3;  // report actions are 3..6
constexpr int kMaxEpisodeSteps = 32;

enum class TaskKind { Wagering, DualTask, DualMasking };

struct TaskConfig {
    TaskKind kind = TaskKind::DualTask;
    bool ood = false;           // dual: draw held-out cue combinations
    double stim_noise = 0.45;   // wagering: observation noise on the stimulus dims
    int n_masks = 4;            // masking variant: distractors after the cue
    bool miniature = false;     // 3-step wagering episode (exhaustive-search tests)
};

// Everything random about an episode, drawn once at reset.
struct EpisodeScript {
    TaskKind kind = TaskKind::DualTask;
    int length = 0;
    int v = -1;          // secondary color value 0..3
    int u = -1;          // primary object value 0..3
    int s = -1;          // wagering stimulus class 0/1
    double salience = 1.0;
    bool wager = false;
    int r1 = -1;         // early report step (dual) / decision step (wagering)
    int r2 = -1;         // late report step (dual) / wager step (wagering)
    int cue_step = -1;   // masking variant: cue entry step
    int n_masks = 0;
    int start_r = 1, start_c = 1, start_dir = 0;
};

struct ObsTensor {
    Tensor grid;      // [3,7,7] symbolic (object id, value, active)
    Tensor task_vec;  // [7]
    Tensor cue16;     // [16] cue channel for the workspace write path
};

struct StepInfo {
    int step = 0;
    int oracle_action = 0;
    Tensor oracle_dist;       // one-hot over 7 actions
    bool report_step = false; // a report/decision is due this step
    bool primary_report = false;
    bool cue_write = false;   // workspace write trigger
    bool wager_step = false;
    int truth_action = -1;    // correct report action when report_step
    int panel_code = kCodeBlank;
};

struct StepOutcome {
    ObsTensor obs;   // observation for the next step
    StepInfo info;   // info for the next step
    double reward = 0.0;
    bool done = false;
};

// Deterministic 7x7 gridworld running one of the task scripts. The panel on
// the left wall displays cues and flags; the agent navigates the 5x5 interior
// and answers through symbolic report actions 3..6.
class GridEnv {
public:
    explicit GridEnv(const TaskConfig& cfg) : cfg_(cfg) {}

    // Draws a fresh episode script from rng and returns the first observation.
    ObsTensor reset(Rng& rng);
    StepInfo current_info() const { return make_info(t_); }
    const EpisodeScript& script() const { return script_; }

    // Applies the action (0..6); confidence is consumed only on wager steps.
    StepOutcome step(int action, double confidence = 0.0);

    int agent_row() const { return pos_r_; }
    int agent_col() const { return pos_c_; }
    int agent_dir() const { return dir_; }
    bool decision_was_correct() const { return decision_correct_; }

    // Shortest-path navigation action from an arbitrary pose (tests).
    int nav_oracle(int r, int c, int dir) const;

private:
    ObsTensor make_obs(int t) const;
    StepInfo make_info(int t) const;
    int panel_code_at(int t) const;
    int oracle_action_at(int t, int r, int c, int dir) const;
    void build_bfs();

    TaskConfig cfg_;
    EpisodeScript script_;
    std::vector<Tensor> cue_track_;  // per-step cue16, precomputed at reset
    int t_ = 0;
    int pos_r_ = 1, pos_c_ = 1, dir_ = 0;
    bool decision_correct_ = false;
    bool decision_seen_ = false;
    int bfs_action_[7][7][4] = {};
};

// Strong-lesion wiring: strips cue content from the trunk observation (panel
// value/active channels and the task vector) and hands it to the workspace
// write path instead. With wiring off the observation passes through and the
// cue channel is empty.
// Observation after cue-wiring surgery. The trunk feeds the shared encoder;
// write_cue16 feeds only the workspace write head. With the wiring intact both
// carry the cue; with it severed, the cue survives only on the write channel.
struct RoutedObs {
    ObsTensor trunk;
    Tensor write_cue16;
};
RoutedObs strong_lesion_route(const ObsTensor& obs, bool wiring);

// In-distribution / held-out split of (secondary, primary) cue combinations.
bool is_ood_combo(int v, int u);

std::string task_kind_name(TaskKind k);
TaskKind task_kind_from_name(const std::string& s);

}  // namespace agentlab
