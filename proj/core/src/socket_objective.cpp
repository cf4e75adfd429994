#include "multifid/socket_objective.hpp"

#include <arpa/inet.h>
#include <netdb.h>
#include <netinet/in.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>
#include <stdexcept>

namespace multifid {

namespace {

class Fd {
 public:
  explicit Fd(int fd) : fd_(fd) {}
  ~Fd() {
    if (fd_ >= 0) ::close(fd_);
  }
  Fd(const Fd&) = delete;
  Fd& operator=(const Fd&) = delete;
  int get() const { return fd_; }

 private:
  int fd_;
};

void write_all(int fd, const std::string& data) {
  std::size_t off = 0;
  while (off < data.size()) {
    const auto n = ::send(fd, data.data() + off, data.size() - off, MSG_NOSIGNAL);
    if (n < 0) {
      if (errno == EINTR) continue;
      throw std::runtime_error(std::string("socket write failed: ") + std::strerror(errno));
    }
    off += static_cast<std::size_t>(n);
  }
}

// Reads one '\n'-terminated line; returns false on EOF before any byte.
bool read_line(int fd, std::string& buffer, std::string& line) {
  for (;;) {
    if (auto pos = buffer.find('\n'); pos != std::string::npos) {
      line = buffer.substr(0, pos);
      buffer.erase(0, pos + 1);
      return true;
    }
    char chunk[4096];
    const auto n = ::recv(fd, chunk, sizeof(chunk), 0);
    if (n < 0) {
      if (errno == EINTR) continue;
      throw std::runtime_error(std::string("socket read failed: ") + std::strerror(errno));
    }
    if (n == 0) {
      if (buffer.empty()) return false;
      line = std::move(buffer);
      buffer.clear();
      return true;
    }
    buffer.append(chunk, static_cast<std::size_t>(n));
  }
}

}  // namespace

json job_to_wire(const Job& job) {
  return {{"job_id", job.job_id}, {"config", job.configuration.to_json()}, {"budget", job.budget}, {"seed", job.seed}};
}

Job job_from_wire(const json& j, const ConfigurationSpace& space) {
  Job job;
  job.job_id = j.at("job_id").get<std::uint64_t>();
  job.configuration = space.configuration_from_json(j.at("config"));
  job.budget = j.at("budget").get<double>();
  job.seed = j.value("seed", std::uint64_t{0});
  return job;
}

json result_to_wire(const JobResult& r) {
  json j = {{"job_id", r.job_id}, {"loss", r.loss}, {"status", r.status == JobStatus::ok ? "ok" : "crashed"}};
  if (r.learning_curve) j["curve"] = *r.learning_curve;
  j["wall_time"] = r.wall_time;
  return j;
}

JobResult result_from_wire(const json& j) {
  JobResult r;
  r.job_id = j.at("job_id").get<std::uint64_t>();
  r.loss = j.at("loss").is_number() ? j.at("loss").get<double>() : kCrashLoss;
  r.status = j.at("status").get<std::string>() == "ok" ? JobStatus::ok : JobStatus::crashed;
  if (j.contains("curve") && j["curve"].is_array()) r.learning_curve = j["curve"].get<std::vector<double>>();
  r.wall_time = j.value("wall_time", 0.0);
  return r;
}

SocketObjective::SocketObjective(std::string host, int port) : host_(std::move(host)), port_(port) {}

std::shared_ptr<SocketObjective> SocketObjective::from_address(const std::string& address) {
  const auto colon = address.rfind(':');
  if (colon == std::string::npos) throw std::invalid_argument("socket address must be host:port");
  return std::make_shared<SocketObjective>(address.substr(0, colon), std::stoi(address.substr(colon + 1)));
}

JobResult SocketObjective::evaluate(const Job& job) const {
  addrinfo hints{};
  hints.ai_family = AF_INET;
  hints.ai_socktype = SOCK_STREAM;
  addrinfo* res = nullptr;
  if (::getaddrinfo(host_.c_str(), std::to_string(port_).c_str(), &hints, &res) != 0 || !res)
    throw std::runtime_error("cannot resolve " + host_);
  Fd fd(::socket(res->ai_family, res->ai_socktype, res->ai_protocol));
  const int rc = fd.get() >= 0 ? ::connect(fd.get(), res->ai_addr, res->ai_addrlen) : -1;
  ::freeaddrinfo(res);
  if (rc != 0) throw std::runtime_error("cannot connect to " + describe());

  write_all(fd.get(), job_to_wire(job).dump() + "\n");
  std::string buffer, line;
  if (!read_line(fd.get(), buffer, line)) throw std::runtime_error("worker closed connection without a result");
  return result_from_wire(json::parse(line));
}

SocketWorkerServer::SocketWorkerServer(std::shared_ptr<const Objective> objective,
                                       std::shared_ptr<const ConfigurationSpace> space, int port)
    : objective_(std::move(objective)), space_(std::move(space)) {
  listen_fd_ = ::socket(AF_INET, SOCK_STREAM, 0);
  if (listen_fd_ < 0) throw std::runtime_error("cannot create socket");
  int yes = 1;
  ::setsockopt(listen_fd_, SOL_SOCKET, SO_REUSEADDR, &yes, sizeof(yes));
  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_addr.s_addr = htonl(INADDR_LOOPBACK);
  addr.sin_port = htons(static_cast<std::uint16_t>(port));
  if (::bind(listen_fd_, reinterpret_cast<sockaddr*>(&addr), sizeof(addr)) != 0 || ::listen(listen_fd_, 16) != 0) {
    ::close(listen_fd_);
    throw std::runtime_error("cannot listen on port " + std::to_string(port));
  }
  socklen_t len = sizeof(addr);
  ::getsockname(listen_fd_, reinterpret_cast<sockaddr*>(&addr), &len);
  port_ = ntohs(addr.sin_port);
}

SocketWorkerServer::~SocketWorkerServer() { stop(); }

void SocketWorkerServer::start() {
  thread_ = std::thread([this] { run(); });
}

void SocketWorkerServer::run() {
  while (!stop_) {
    pollfd p{listen_fd_, POLLIN, 0};
    const int ready = ::poll(&p, 1, 50);
    if (ready <= 0) continue;
    const int fd = ::accept(listen_fd_, nullptr, nullptr);
    if (fd < 0) continue;
    handle_connection(fd);
  }
}

void SocketWorkerServer::handle_connection(int raw) {
  Fd fd(raw);
  std::string buffer, line;
  try {
    while (read_line(fd.get(), buffer, line)) {
      if (line.empty()) continue;
      json response;
      try {
        const Job job = job_from_wire(json::parse(line), *space_);
        response = result_to_wire(evaluate(*objective_, job));
      } catch (const std::exception& e) {
        json req = json::parse(line, nullptr, false);
        const std::uint64_t id = req.is_object() && req.contains("job_id") ? req["job_id"].get<std::uint64_t>() : 0;
        response = {{"job_id", id}, {"loss", kCrashLoss}, {"status", "crashed"}, {"error", e.what()}};
      }
      write_all(fd.get(), response.dump() + "\n");
    }
  } catch (const std::exception&) {
    // connection dropped; the client treats this as a crashed evaluation
  }
}

void SocketWorkerServer::stop() {
  stop_ = true;
  if (thread_.joinable()) thread_.join();
  if (listen_fd_ >= 0) {
    ::close(listen_fd_);
    listen_fd_ = -1;
  }
}

}  // namespace multifid
