#pragma once

#include <atomic>
#include <memory>
#include <string>
#include <thread>

#include "multifid/configspace.hpp"
#include "multifid/executor.hpp"

namespace multifid {

// Line-delimited JSON wire format for out-of-process workers.
//   request:  {"job_id", "config", "budget", "seed"}
//   response: {"job_id", "loss", "status", "curve"?, "predictions_path"?}
json job_to_wire(const Job& job);
Job job_from_wire(const json& j, const ConfigurationSpace& space);
json result_to_wire(const JobResult& result);
JobResult result_from_wire(const json& j);

/// Client side: forwards each evaluation to a worker at host:port over TCP.
class SocketObjective : public Objective {
 public:
  SocketObjective(std::string host, int port);
  /// Parses "host:port".
  static std::shared_ptr<SocketObjective> from_address(const std::string& address);

  JobResult evaluate(const Job& job) const override;
  std::string describe() const override { return "socket:" + host_ + ":" + std::to_string(port_); }

 private:
  std::string host_;
  int port_;
};

/// Worker side: accepts connections and answers requests with the wrapped objective.
class SocketWorkerServer {
 public:
  SocketWorkerServer(std::shared_ptr<const Objective> objective, std::shared_ptr<const ConfigurationSpace> space,
                     int port = 0);
  ~SocketWorkerServer();
  SocketWorkerServer(const SocketWorkerServer&) = delete;
  SocketWorkerServer& operator=(const SocketWorkerServer&) = delete;

  int port() const { return port_; }
  /// Serves in a background thread until stop().
  void start();
  /// Serves on the calling thread until stop() is called from elsewhere.
  void run();
  void stop();

 private:
  void handle_connection(int fd);

  std::shared_ptr<const Objective> objective_;
  std::shared_ptr<const ConfigurationSpace> space_;
  int listen_fd_ = -1;
  int port_ = 0;
  std::atomic<bool> stop_{false};
  std::thread thread_;
};

}  // namespace multifid
