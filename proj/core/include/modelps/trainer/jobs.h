#pragma once

#include <atomic>
#include <condition_variable>
#include <cstdint>
#include <deque>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <nlohmann/json.hpp>

#include "modelps/trainer/train_config.h"
#include "modelps/trainer/training_run.h"

namespace modelps::trainer {

enum class JobState { kQueued, kRunning, kPaused, kCompleted, kTerminated, kFailed };

std::string_view to_string(JobState state);
JobState job_state_from_string(std::string_view name);
bool is_terminal(JobState state);
// Queued->{Running,Terminated}; Running->{Paused,Completed,Terminated,Failed};
// Paused->{Running,Terminated}. Terminal states absorb.
bool legal_transition(JobState from, JobState to);
// Throws IllegalTransition{from, to} unless legal.
void check_transition(JobState from, JobState to);

struct JobInfo {
  std::string job_id;
  TrainConfig config;
  JobState state = JobState::kQueued;
  std::string failure_reason;
  std::optional<int> device;            // worker that last ran the job
  std::optional<int> requested_device;  // set by to_device
  int epochs_completed = 0;
  int total_epochs = 0;
  std::optional<int> checkpoint_epoch;
  std::optional<ValidationReport> result;
  std::optional<std::string> published_model_id;
  bool pause_requested = false;
  bool resume_pending = false;
  std::int64_t created_at = 0;
  std::int64_t updated_at = 0;
};

nlohmann::ordered_json to_json(const JobInfo& job);
JobInfo job_from_json(const nlohmann::json& j);
std::string device_name(int device);
int device_from_string(std::string_view name);

// Chooses the next queued job a free worker should run.
class SchedulingPolicy {
 public:
  virtual ~SchedulingPolicy() = default;
  virtual std::optional<std::size_t> pick(const std::deque<std::string>& queue,
                                          const std::map<std::string, JobInfo>& jobs,
                                          int worker) const = 0;
};

// First job in queue order that is unpinned or pinned to `worker`.
class FifoPolicy : public SchedulingPolicy {
 public:
  std::optional<std::size_t> pick(const std::deque<std::string>& queue,
                                  const std::map<std::string, JobInfo>& jobs,
                                  int worker) const override;
};

struct JobHooks {
  // Called after every state or progress change, outside the table lock.
  std::function<void(const JobInfo&)> on_change;
  // Called with the finished run before the job turns Completed; returns the
  // published model id, if any.
  std::function<std::optional<std::string>(const JobInfo&, const TrainingRun&)> on_complete;
  // Records every state change (from, to).
  std::function<void(const std::string&, JobState, JobState)> on_transition;
};

struct JobManagerOptions {
  int workers = 1;
  // Checkpoints are written here when a job pauses.
  std::optional<std::filesystem::path> checkpoint_dir;
  // "<id>.control" files here ("pause" | "terminate") act like API calls.
  std::optional<std::filesystem::path> control_dir;
  // When false, jobs wait in the queue until start_workers() is called.
  bool autostart = true;
};

// Shared job table with a pool of worker threads. Lifecycle calls are safe
// from any thread.
class JobManager {
 public:
  JobManager(TrainingContext ctx, JobManagerOptions options, JobHooks hooks = {},
             std::unique_ptr<SchedulingPolicy> policy = std::make_unique<FifoPolicy>());
  ~JobManager();
  JobManager(const JobManager&) = delete;
  JobManager& operator=(const JobManager&) = delete;

  void start_workers();

  // Validates the config (building the run) and enqueues it.
  std::string start(const TrainConfig& config);
  // Re-registers a persisted paused job from its checkpoint.
  std::string adopt_paused(const JobInfo& info, const Checkpoint& checkpoint);

  void pause(const std::string& job_id);
  void resume(const std::string& job_id);
  void terminate(const std::string& job_id);
  void to_device(const std::string& job_id, int device);

  JobInfo get(const std::string& job_id) const;
  std::vector<JobInfo> list() const;
  // The training run behind a job (for inspection after it stops).
  std::shared_ptr<const TrainingRun> run(const std::string& job_id) const;

  // Blocks until the job is Paused or terminal, or the timeout passes.
  bool wait(const std::string& job_id, double timeout_s = 1e9) const;
  int workers() const { return options_.workers; }

 private:
  struct Runtime {
    std::shared_ptr<TrainingRun> run;
    std::atomic<bool> pause{false};
    std::atomic<bool> terminate{false};
  };
  class Control;

  void worker_loop(int worker);
  // Caller holds mu_.
  void set_state(JobInfo& info, JobState to);
  JobInfo& info_locked(const std::string& job_id);
  void notify(const std::string& job_id);
  void poll_control_file(const std::string& job_id);

  TrainingContext ctx_;
  JobManagerOptions options_;
  JobHooks hooks_;
  std::unique_ptr<SchedulingPolicy> policy_;

  mutable std::mutex mu_;
  mutable std::condition_variable cv_;
  mutable std::condition_variable done_cv_;
  std::mutex notify_mu_;
  std::map<std::string, JobInfo> infos_;
  std::map<std::string, std::shared_ptr<Runtime>> runtime_;
  std::deque<std::string> queue_;
  bool shutdown_ = false;
  std::vector<std::thread> threads_;
};

}  // namespace modelps::trainer
