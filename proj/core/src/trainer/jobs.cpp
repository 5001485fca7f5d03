#include "modelps/trainer/jobs.h"

#include <algorithm>
#include <chrono>
#include <fstream>

#include "modelps/error.h"
#include "modelps/util.h"

namespace modelps::trainer {

namespace {

constexpr std::array<std::string_view, 6> kStateNames = {
    "Queued", "Running", "Paused", "Completed", "Terminated", "Failed"};

Error illegal(JobState from, std::string_view to) {
  return Error(ErrorCode::kIllegalTransition,
               "illegal transition " + std::string(to_string(from)) + " -> " + std::string(to),
               {{"from", to_string(from)}, {"to", to}});
}

}  // namespace

std::string_view to_string(JobState s) { return kStateNames[static_cast<int>(s)]; }

JobState job_state_from_string(std::string_view name) {
  for (std::size_t i = 0; i < kStateNames.size(); ++i) {
    if (kStateNames[i] == name) return static_cast<JobState>(i);
  }
  throw Error(ErrorCode::kInvalidArgument, "unknown job state '" + std::string(name) + "'");
}

bool is_terminal(JobState s) {
  return s == JobState::kCompleted || s == JobState::kTerminated || s == JobState::kFailed;
}

bool legal_transition(JobState from, JobState to) {
  using S = JobState;
  switch (from) {
    case S::kQueued: return to == S::kRunning || to == S::kTerminated;
    case S::kRunning:
      return to == S::kPaused || to == S::kCompleted || to == S::kTerminated || to == S::kFailed;
    case S::kPaused: return to == S::kRunning || to == S::kTerminated;
    default: return false;
  }
}

void check_transition(JobState from, JobState to) {
  if (!legal_transition(from, to)) throw illegal(from, to_string(to));
}

std::string device_name(int d) { return "cpu" + std::to_string(d); }

int device_from_string(std::string_view name) {
  if (name.size() > 3 && name.substr(0, 3) == "cpu") {
    try {
      std::size_t used = 0;
      int d = std::stoi(std::string(name.substr(3)), &used);
      if (used == name.size() - 3 && d >= 0) return d;
    } catch (const std::exception&) {
    }
  }
  throw Error(ErrorCode::kInvalidArgument, "device must look like cpu<N>, got '" +
                                               std::string(name) + "'");
}

nlohmann::ordered_json to_json(const JobInfo& j) {
  nlohmann::ordered_json o;
  o["job_id"] = j.job_id;
  o["state"] = to_string(j.state);
  if (j.state == JobState::kFailed) o["reason"] = j.failure_reason;
  o["device"] = j.device ? nlohmann::ordered_json(device_name(*j.device)) : nlohmann::ordered_json(nullptr);
  o["requested_device"] =
      j.requested_device ? nlohmann::ordered_json(device_name(*j.requested_device)) : nlohmann::ordered_json(nullptr);
  o["epochs_completed"] = j.epochs_completed;
  o["total_epochs"] = j.total_epochs;
  o["checkpoint"] = j.checkpoint_epoch ? nlohmann::ordered_json{{"epoch", *j.checkpoint_epoch}}
                                       : nlohmann::ordered_json(nullptr);
  o["result"] = j.result ? to_json(*j.result) : nlohmann::ordered_json(nullptr);
  o["published_model_id"] =
      j.published_model_id ? nlohmann::ordered_json(*j.published_model_id) : nlohmann::ordered_json(nullptr);
  o["pause_requested"] = j.pause_requested;
  o["resume_pending"] = j.resume_pending;
  o["created_at"] = j.created_at;
  o["updated_at"] = j.updated_at;
  o["config"] = to_json(j.config);
  return o;
}

JobInfo job_from_json(const nlohmann::json& j) {
  try {
    JobInfo info;
    info.job_id = j.at("job_id");
    info.state = job_state_from_string(j.at("state").get<std::string>());
    info.failure_reason = j.value("reason", "");
    if (!j.at("device").is_null()) info.device = device_from_string(j["device"].get<std::string>());
    if (j.contains("requested_device") && !j["requested_device"].is_null()) {
      info.requested_device = device_from_string(j["requested_device"].get<std::string>());
    }
    info.epochs_completed = j.at("epochs_completed");
    info.total_epochs = j.at("total_epochs");
    if (!j.at("checkpoint").is_null()) info.checkpoint_epoch = j["checkpoint"].at("epoch");
    if (!j.at("result").is_null()) info.result = report_from_json(j["result"]);
    if (!j.at("published_model_id").is_null()) info.published_model_id = j["published_model_id"];
    info.pause_requested = j.value("pause_requested", false);
    info.resume_pending = j.value("resume_pending", false);
    info.created_at = j.value("created_at", std::int64_t{0});
    info.updated_at = j.value("updated_at", std::int64_t{0});
    info.config = train_config_from_json(j.at("config"));
    return info;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kStoreCorrupt, std::string("bad job document: ") + e.what());
  }
}

std::optional<std::size_t> FifoPolicy::pick(const std::deque<std::string>& queue,
                                            const std::map<std::string, JobInfo>& jobs,
                                            int worker) const {
  for (std::size_t i = 0; i < queue.size(); ++i) {
    const JobInfo& j = jobs.at(queue[i]);
    if (!j.requested_device || *j.requested_device == worker) return i;
  }
  return std::nullopt;
}

class JobManager::Control : public RunControl {
 public:
  Control(JobManager& m, std::string id, Runtime& rt) : m_(m), id_(std::move(id)), rt_(rt) {}

  bool pause_requested() const override {
    m_.poll_control_file(id_);
    return rt_.pause.load();
  }
  bool terminate_requested() const override {
    m_.poll_control_file(id_);
    return rt_.terminate.load();
  }
  void on_epoch(int epoch, double) override {
    {
      std::lock_guard lock(m_.mu_);
      JobInfo& info = m_.infos_.at(id_);
      info.epochs_completed = epoch;
      info.updated_at = now_ms();
    }
    m_.notify(id_);
  }

 private:
  JobManager& m_;
  std::string id_;
  Runtime& rt_;
};

JobManager::JobManager(TrainingContext ctx, JobManagerOptions options, JobHooks hooks,
                       std::unique_ptr<SchedulingPolicy> policy)
    : ctx_(ctx), options_(std::move(options)), hooks_(std::move(hooks)), policy_(std::move(policy)) {
  if (options_.workers < 1) throw Error(ErrorCode::kInvalidArgument, "worker count must be >= 1");
  if (options_.autostart) start_workers();
}

JobManager::~JobManager() {
  {
    std::lock_guard lock(mu_);
    shutdown_ = true;
    // Running jobs stop at their next epoch boundary and keep a checkpoint.
    for (auto& [id, rt] : runtime_) {
      if (infos_.at(id).state == JobState::kRunning) rt->pause = true;
    }
  }
  cv_.notify_all();
  for (auto& t : threads_) t.join();
}

void JobManager::start_workers() {
  std::lock_guard lock(mu_);
  if (!threads_.empty()) return;
  for (int w = 0; w < options_.workers; ++w) threads_.emplace_back([this, w] { worker_loop(w); });
}

void JobManager::set_state(JobInfo& info, JobState to) {
  check_transition(info.state, to);
  const JobState from = info.state;
  info.state = to;
  info.updated_at = now_ms();
  if (hooks_.on_transition) hooks_.on_transition(info.job_id, from, to);
  done_cv_.notify_all();
}

JobInfo& JobManager::info_locked(const std::string& id) {
  auto it = infos_.find(id);
  if (it == infos_.end()) {
    throw Error(ErrorCode::kUnknownJob, "unknown job '" + id + "'", {{"job_id", id}});
  }
  return it->second;
}

void JobManager::notify(const std::string& id) {
  if (!hooks_.on_change) return;
  std::lock_guard nl(notify_mu_);
  JobInfo copy;
  {
    std::lock_guard lock(mu_);
    copy = infos_.at(id);
  }
  hooks_.on_change(copy);
}

void JobManager::poll_control_file(const std::string& id) {
  if (!options_.control_dir) return;
  const auto path = *options_.control_dir / (id + ".control");
  std::error_code ec;
  if (!std::filesystem::exists(path, ec)) return;
  std::string cmd;
  {
    std::ifstream in(path);
    in >> cmd;
  }
  std::filesystem::remove(path, ec);
  try {
    if (cmd == "pause") pause(id);
    if (cmd == "terminate") terminate(id);
  } catch (const Error&) {
    // Stale request for a job that already moved on.
  }
}

std::string JobManager::start(const TrainConfig& config) {
  auto rt = std::make_shared<Runtime>();
  rt->run = std::make_shared<TrainingRun>(ctx_, config);
  JobInfo info;
  info.job_id = random_id("job");
  info.config = config;
  info.total_epochs = rt->run->total_epochs();
  info.created_at = info.updated_at = now_ms();
  {
    std::lock_guard lock(mu_);
    infos_[info.job_id] = info;
    runtime_[info.job_id] = rt;
    queue_.push_back(info.job_id);
  }
  cv_.notify_all();
  notify(info.job_id);
  return info.job_id;
}

std::string JobManager::adopt_paused(const JobInfo& persisted, const Checkpoint& checkpoint) {
  auto rt = std::make_shared<Runtime>();
  rt->run = std::make_shared<TrainingRun>(ctx_, persisted.config);
  rt->run->restore(checkpoint);
  JobInfo info = persisted;
  info.state = JobState::kPaused;
  info.pause_requested = false;
  info.resume_pending = false;
  info.epochs_completed = rt->run->epochs_completed();
  info.checkpoint_epoch = checkpoint.epoch;
  {
    std::lock_guard lock(mu_);
    if (infos_.count(info.job_id)) {
      throw Error(ErrorCode::kInvalidArgument, "job '" + info.job_id + "' already loaded");
    }
    infos_[info.job_id] = info;
    runtime_[info.job_id] = rt;
  }
  notify(info.job_id);
  return info.job_id;
}

void JobManager::pause(const std::string& id) {
  {
    std::lock_guard lock(mu_);
    JobInfo& info = info_locked(id);
    if (info.state != JobState::kRunning) throw illegal(info.state, "Paused");
    if (info.pause_requested) return;
    info.pause_requested = true;
    info.updated_at = now_ms();
    runtime_.at(id)->pause = true;
  }
  notify(id);
}

void JobManager::resume(const std::string& id) {
  {
    std::lock_guard lock(mu_);
    JobInfo& info = info_locked(id);
    if (info.state == JobState::kRunning && info.pause_requested) {
      // Not paused yet: withdraw the request.
      info.pause_requested = false;
      runtime_.at(id)->pause = false;
    } else if (info.state != JobState::kPaused) {
      throw illegal(info.state, "Running");
    } else if (!info.resume_pending) {
      info.resume_pending = true;
      queue_.push_front(id);
    }
    info.updated_at = now_ms();
  }
  cv_.notify_all();
  notify(id);
}

void JobManager::terminate(const std::string& id) {
  {
    std::lock_guard lock(mu_);
    JobInfo& info = info_locked(id);
    set_state(info, JobState::kTerminated);
    info.pause_requested = false;
    info.resume_pending = false;
    runtime_.at(id)->terminate = true;
    queue_.erase(std::remove(queue_.begin(), queue_.end(), id), queue_.end());
  }
  notify(id);
}

void JobManager::to_device(const std::string& id, int device) {
  {
    std::lock_guard lock(mu_);
    JobInfo& info = info_locked(id);
    if (info.state != JobState::kQueued && info.state != JobState::kPaused) {
      throw illegal(info.state, "to_device");
    }
    if (device < 0 || device >= options_.workers) {
      throw Error(ErrorCode::kInvalidArgument,
                  "no such device " + device_name(device) + " (workers: " +
                      std::to_string(options_.workers) + ")",
                  {{"device", device_name(device)}});
    }
    info.requested_device = device;
    info.updated_at = now_ms();
  }
  cv_.notify_all();
  notify(id);
}

JobInfo JobManager::get(const std::string& id) const {
  std::lock_guard lock(mu_);
  return const_cast<JobManager*>(this)->info_locked(id);
}

std::vector<JobInfo> JobManager::list() const {
  std::lock_guard lock(mu_);
  std::vector<JobInfo> out;
  for (const auto& [_, info] : infos_) out.push_back(info);
  return out;
}

std::shared_ptr<const TrainingRun> JobManager::run(const std::string& id) const {
  std::lock_guard lock(mu_);
  const_cast<JobManager*>(this)->info_locked(id);
  return runtime_.at(id)->run;
}

bool JobManager::wait(const std::string& id, double timeout_s) const {
  std::unique_lock lock(mu_);
  const_cast<JobManager*>(this)->info_locked(id);
  auto settled = [&] {
    const JobInfo& info = infos_.at(id);
    if (is_terminal(info.state)) return true;
    return info.state == JobState::kPaused && !info.resume_pending;
  };
  return done_cv_.wait_for(lock, std::chrono::duration<double>(timeout_s), settled);
}

void JobManager::worker_loop(int worker) {
  for (;;) {
    std::string id;
    std::shared_ptr<Runtime> rt;
    {
      std::unique_lock lock(mu_);
      std::optional<std::size_t> pos;
      cv_.wait(lock, [&] {
        if (shutdown_) return true;
        pos = policy_->pick(queue_, infos_, worker);
        return pos.has_value();
      });
      if (shutdown_) return;
      id = queue_[*pos];
      queue_.erase(queue_.begin() + static_cast<std::ptrdiff_t>(*pos));
      JobInfo& info = infos_.at(id);
      info.resume_pending = false;
      info.device = worker;
      set_state(info, JobState::kRunning);
      rt = runtime_.at(id);
    }
    notify(id);

    Control control(*this, id, *rt);
    std::optional<RunStatus> status;
    std::string failure;
    try {
      status = rt->run->run(control);
    } catch (const std::exception& e) {
      failure = e.what();
    }

    std::optional<ValidationReport> report;
    std::optional<std::string> published;
    std::optional<Checkpoint> checkpoint;
    if (status == RunStatus::kCompleted) {
      try {
        report = rt->run->report();
        JobInfo snapshot = get(id);
        snapshot.result = report;
        if (hooks_.on_complete && snapshot.state == JobState::kRunning) {
          published = hooks_.on_complete(snapshot, *rt->run);
        }
      } catch (const std::exception& e) {
        status.reset();
        failure = e.what();
      }
    } else if (status == RunStatus::kPaused) {
      checkpoint = rt->run->checkpoint();
      if (options_.checkpoint_dir) {
        try {
          save_checkpoint(*options_.checkpoint_dir, id, *checkpoint);
        } catch (const std::exception& e) {
          status.reset();
          failure = std::string("checkpoint failed: ") + e.what();
        }
      }
    }

    {
      std::lock_guard lock(mu_);
      JobInfo& info = infos_.at(id);
      info.epochs_completed = rt->run->epochs_completed();
      if (info.state == JobState::kRunning) {
        if (!status) {
          info.failure_reason = failure;
          set_state(info, JobState::kFailed);
        } else if (*status == RunStatus::kCompleted) {
          info.result = report;
          info.published_model_id = published;
          set_state(info, JobState::kCompleted);
        } else if (*status == RunStatus::kPaused) {
          info.pause_requested = false;
          rt->pause = false;
          info.checkpoint_epoch = checkpoint->epoch;
          set_state(info, JobState::kPaused);
        }
      }
    }
    notify(id);
  }
}

}  // namespace modelps::trainer
