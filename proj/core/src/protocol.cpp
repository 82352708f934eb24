#include "affordsim/protocol.hpp"

#include <arpa/inet.h>
#include <netdb.h>
#include <netinet/in.h>
#include <poll.h>
#include <signal.h>
#include <sys/socket.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cerrno>
#include <chrono>
#include <cstring>
#include <istream>
#include <ostream>

namespace affordsim::protocol {

namespace {

using Clock = std::chrono::steady_clock;

void ignore_sigpipe() {
  // A peer hanging up mid-write must surface as an error, not kill the
  // process.
  static std::once_flag once;
  std::call_once(once, [] { ::signal(SIGPIPE, SIG_IGN); });
}

[[noreturn]] void fail_errno(const std::string& what) {
  throw ProtocolError(what + ": " + std::strerror(errno));
}

// Line framing over raw file descriptors, shared by the TCP and pipe
// transports. in_fd may equal out_fd.
class FdStream : public ByteStream {
 public:
  FdStream(int in_fd, int out_fd) : in_fd_(in_fd), out_fd_(out_fd) {
    ignore_sigpipe();
  }

  void send_line(const std::string& line) override {
    std::string framed = line + "\n";
    std::size_t sent = 0;
    while (sent < framed.size()) {
      ssize_t n = ::write(out_fd_, framed.data() + sent, framed.size() - sent);
      if (n < 0) {
        if (errno == EINTR) continue;
        fail_errno("write to reasoner stream failed");
      }
      sent += static_cast<std::size_t>(n);
    }
  }

  std::string recv_line(int timeout_ms) override {
    auto deadline = Clock::now() + std::chrono::milliseconds(timeout_ms);
    for (;;) {
      auto eol = buf_.find('\n');
      if (eol != std::string::npos) {
        std::string line = buf_.substr(0, eol);
        buf_.erase(0, eol + 1);
        if (!line.empty() && line.back() == '\r') line.pop_back();
        return line;
      }
      int wait = -1;  // negative timeout blocks indefinitely
      if (timeout_ms >= 0) {
        auto left = std::chrono::duration_cast<std::chrono::milliseconds>(
                        deadline - Clock::now())
                        .count();
        if (left <= 0) throw TimeoutError("no response within the deadline");
        wait = static_cast<int>(left);
      }
      pollfd pfd{in_fd_, POLLIN, 0};
      int ready = ::poll(&pfd, 1, wait);
      if (ready < 0) {
        if (errno == EINTR) continue;
        fail_errno("poll on reasoner stream failed");
      }
      if (ready == 0) throw TimeoutError("no response within the deadline");
      char chunk[4096];
      ssize_t n = ::read(in_fd_, chunk, sizeof chunk);
      if (n < 0) {
        if (errno == EINTR) continue;
        fail_errno("read from reasoner stream failed");
      }
      if (n == 0) throw ProtocolError("reasoner stream closed");
      buf_.append(chunk, static_cast<std::size_t>(n));
    }
  }

 protected:
  int in_fd_;
  int out_fd_;

 private:
  std::string buf_;
};

class TcpStream : public FdStream {
 public:
  explicit TcpStream(int fd) : FdStream(fd, fd) {}
  ~TcpStream() override { ::close(in_fd_); }
};

// Child process speaking the protocol on stdin/stdout.
class PipeStream : public FdStream {
 public:
  explicit PipeStream(const std::string& command) : FdStream(-1, -1) {
    int to_child[2];
    int from_child[2];
    if (::pipe(to_child) != 0) fail_errno("pipe failed");
    if (::pipe(from_child) != 0) {
      ::close(to_child[0]);
      ::close(to_child[1]);
      fail_errno("pipe failed");
    }
    pid_ = ::fork();
    if (pid_ < 0) fail_errno("fork failed");
    if (pid_ == 0) {
      ::dup2(to_child[0], STDIN_FILENO);
      ::dup2(from_child[1], STDOUT_FILENO);
      for (int fd : {to_child[0], to_child[1], from_child[0], from_child[1]}) {
        ::close(fd);
      }
      ::execl("/bin/sh", "sh", "-c", command.c_str(), (char*)nullptr);
      _exit(127);
    }
    ::close(to_child[0]);
    ::close(from_child[1]);
    in_fd_ = from_child[0];
    out_fd_ = to_child[1];
  }

  ~PipeStream() override {
    ::close(out_fd_);  // EOF lets a well-behaved child exit on its own
    ::close(in_fd_);
    ::kill(pid_, SIGTERM);
    int status = 0;
    ::waitpid(pid_, &status, 0);
  }

 private:
  pid_t pid_ = -1;
};

int connect_tcp(const std::string& host, const std::string& port) {
  addrinfo hints{};
  hints.ai_family = AF_UNSPEC;
  hints.ai_socktype = SOCK_STREAM;
  addrinfo* list = nullptr;
  int rc = ::getaddrinfo(host.c_str(), port.c_str(), &hints, &list);
  if (rc != 0) {
    throw ProtocolError("cannot resolve " + host + ":" + port + ": " +
                        gai_strerror(rc));
  }
  int fd = -1;
  for (addrinfo* ai = list; ai != nullptr; ai = ai->ai_next) {
    fd = ::socket(ai->ai_family, ai->ai_socktype, ai->ai_protocol);
    if (fd < 0) continue;
    if (::connect(fd, ai->ai_addr, ai->ai_addrlen) == 0) break;
    ::close(fd);
    fd = -1;
  }
  ::freeaddrinfo(list);
  if (fd < 0) throw ProtocolError("cannot connect to " + host + ":" + port);
  return fd;
}

void handle_connection(StubLogic& logic, int fd) {
  TcpStream stream(fd);
  try {
    for (;;) {
      std::string line = stream.recv_line(-1);
      if (line.empty()) continue;
      Json request = Json::parse(line, nullptr, false);
      stream.send_line(
          logic.answer(request.is_discarded() ? Json() : request).dump());
    }
  } catch (const ProtocolError&) {
    // peer hung up
  }
}

}  // namespace

Json make_request(const agent::ReasonerQuery& query,
                  const std::string& object_class,
                  const sim::Observation& observation) {
  return Json{
      {"v", kProtocolVersion},
      {"episode", query.episode_id},
      {"step", query.step},
      {"target", Json{{"id", query.object_id}, {"class", object_class}}},
      {"candidates", Json::array({"available", "unavailable"})},
      {"observation", observation.to_json()},
      {"references",
       Json{{"available", "the object can be acted on right now"},
            {"unavailable",
             "a latent condition (occupied, used or dirty) blocks the next "
             "action on the object"}}},
  };
}

agent::ReasonerVerdict parse_response(const std::string& line) {
  Json j = Json::parse(line, nullptr, false);
  if (j.is_discarded() || !j.is_object()) {
    throw MalformedResponse("response is not a JSON object: " + line);
  }
  if (!j.contains("v") || !j["v"].is_number_integer() ||
      j["v"].get<int>() != kProtocolVersion) {
    throw MalformedResponse("response lacks the version tag v=1");
  }
  if (!j.contains("state") || !j["state"].is_string()) {
    throw MalformedResponse("response rejected: " +
                            j.value("error", std::string("no state field")));
  }
  agent::ReasonerVerdict verdict;
  if (j.contains("confidence")) {
    if (!j["confidence"].is_number()) {
      throw MalformedResponse("confidence must be a number");
    }
    verdict.confidence = j["confidence"].get<double>();
    if (verdict.confidence < 0.0 || verdict.confidence > 1.0) {
      throw MalformedResponse("confidence outside [0, 1]");
    }
  }
  std::string state = j["state"].get<std::string>();
  if (state == "available") {
    verdict.state = agent::VerdictState::Available;
    return verdict;
  }
  if (state != "unavailable") {
    throw MalformedResponse("unknown state: " + state);
  }
  verdict.state = agent::VerdictState::Unavailable;
  if (!j.contains("category") || !j["category"].is_string()) {
    throw MalformedResponse("unavailable verdicts must carry a category");
  }
  try {
    verdict.category = world::affordance_from_string(j["category"]);
  } catch (const std::invalid_argument& e) {
    throw MalformedResponse(e.what());
  }
  return verdict;
}

Json verdict_to_response(const agent::ReasonerVerdict& verdict) {
  if (verdict.state == agent::VerdictState::NotVisible) {
    throw ProtocolError("not-visible verdicts are client-side only");
  }
  Json j{{"v", kProtocolVersion},
         {"state", to_string(verdict.state)},
         {"category", nullptr},
         {"confidence", verdict.confidence}};
  if (verdict.category) j["category"] = world::to_string(*verdict.category);
  return j;
}

std::unique_ptr<ByteStream> open_endpoint(const std::string& endpoint) {
  if (endpoint.rfind("tcp://", 0) == 0) {
    std::string rest = endpoint.substr(6);
    auto colon = rest.rfind(':');
    if (colon == std::string::npos || colon == 0 || colon + 1 == rest.size()) {
      throw ProtocolError("tcp endpoint must look like tcp://host:port, got " +
                          endpoint);
    }
    return std::make_unique<TcpStream>(
        connect_tcp(rest.substr(0, colon), rest.substr(colon + 1)));
  }
  if (endpoint.rfind("cmd:", 0) == 0) {
    std::string command = endpoint.substr(4);
    if (command.empty()) throw ProtocolError("cmd endpoint has no command");
    return std::make_unique<PipeStream>(command);
  }
  throw ProtocolError("unrecognized endpoint (want tcp://... or cmd:...): " +
                      endpoint);
}

ExternalReasoner::ExternalReasoner(const std::string& endpoint, int timeout_ms)
    : stream_(open_endpoint(endpoint)), timeout_ms_(timeout_ms) {}

ExternalReasoner::ExternalReasoner(std::unique_ptr<ByteStream> stream,
                                   int timeout_ms)
    : stream_(std::move(stream)), timeout_ms_(timeout_ms) {}

agent::ReasonerVerdict ExternalReasoner::assess(const sim::EpisodeState& state,
                                                const agent::ReasonerQuery& query) {
  if (!sim::object_visible(state, query.object_id)) {
    return {agent::VerdictState::NotVisible, std::nullopt, 1.0};
  }
  auto request = make_request(query, state.scene.object(query.object_id).class_name,
                              sim::observe(state));
  stream_->send_line(request.dump());
  return parse_response(stream_->recv_line(timeout_ms_));
}

StubLogic::StubLogic(Mode mode,
                     std::map<std::string, std::vector<genbench::Injection>> injections)
    : mode_(mode), injections_(std::move(injections)) {}

Json StubLogic::answer(const Json& request) {
  auto bad = [](const std::string& why) {
    return Json{{"v", kProtocolVersion}, {"error", why}};
  };
  if (!request.is_object()) return bad("request is not a JSON object");
  if (request.value("v", -1) != kProtocolVersion) {
    return bad("unsupported protocol version");
  }
  if (!request.contains("episode") || !request["episode"].is_string() ||
      !request.contains("step") || !request["step"].is_number_integer() ||
      !request.contains("target") || !request["target"].is_object() ||
      !request["target"].contains("id") || !request["target"]["id"].is_string()) {
    return bad("request is missing required fields");
  }

  agent::ReasonerVerdict verdict;  // available unless the oracle says otherwise
  if (mode_ == Mode::Oracle) {
    std::string episode = request["episode"].get<std::string>();
    std::string id = request["target"]["id"].get<std::string>();
    int step = request["step"].get<int>();
    std::scoped_lock lock(mu_);
    auto it = injections_.find(episode);
    if (it != injections_.end()) {
      for (const auto& inj : it->second) {
        if (inj.object_id != id) continue;
        if (inj.category == world::AffordanceCategory::Occupied) {
          if (inj.busy_duration - step > 0) {
            verdict = {agent::VerdictState::Unavailable, inj.category, 1.0};
          }
        } else if (reported_.insert({episode, id}).second) {
          verdict = {agent::VerdictState::Unavailable, inj.category, 1.0};
        }
      }
    }
  }
  return verdict_to_response(verdict);
}

StubLogic::Mode stub_mode_from_string(const std::string& s) {
  if (s == "oracle") return StubLogic::Mode::Oracle;
  if (s == "always-available") return StubLogic::Mode::AlwaysAvailable;
  throw ProtocolError("unknown stub mode: " + s);
}

void serve_stream(StubLogic& logic, std::istream& in, std::ostream& out) {
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    Json request = Json::parse(line, nullptr, false);
    out << logic.answer(request.is_discarded() ? Json() : request).dump()
        << "\n";
    out.flush();
  }
}

TcpServer::TcpServer(StubLogic& logic, const std::string& host, int port)
    : logic_(logic) {
  ignore_sigpipe();
  listen_fd_ = ::socket(AF_INET, SOCK_STREAM, 0);
  if (listen_fd_ < 0) fail_errno("socket failed");
  int one = 1;
  ::setsockopt(listen_fd_, SOL_SOCKET, SO_REUSEADDR, &one, sizeof one);
  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_port = htons(static_cast<std::uint16_t>(port));
  if (::inet_pton(AF_INET, host.c_str(), &addr.sin_addr) != 1) {
    ::close(listen_fd_);
    throw ProtocolError("cannot parse listen address: " + host);
  }
  if (::bind(listen_fd_, reinterpret_cast<sockaddr*>(&addr), sizeof addr) != 0) {
    int saved = errno;
    ::close(listen_fd_);
    throw ProtocolError("bind to " + host + ":" + std::to_string(port) +
                        " failed: " + std::strerror(saved));
  }
  if (::listen(listen_fd_, 16) != 0) {
    int saved = errno;
    ::close(listen_fd_);
    throw ProtocolError(std::string("listen failed: ") + std::strerror(saved));
  }
  sockaddr_in bound{};
  socklen_t len = sizeof bound;
  ::getsockname(listen_fd_, reinterpret_cast<sockaddr*>(&bound), &len);
  port_ = ntohs(bound.sin_port);
}

TcpServer::~TcpServer() {
  stop();
  if (listen_fd_ >= 0) ::close(listen_fd_);
}

void TcpServer::run() {
  for (;;) {
    int fd = ::accept(listen_fd_, nullptr, nullptr);
    if (fd < 0) {
      if (errno == EINTR) continue;
      break;  // listener shut down
    }
    workers_.emplace_back([this, fd] { handle_connection(logic_, fd); });
  }
  for (auto& t : workers_) {
    if (t.joinable()) t.join();
  }
  workers_.clear();
}

void TcpServer::stop() {
  if (listen_fd_ >= 0) ::shutdown(listen_fd_, SHUT_RDWR);
}

}  // namespace affordsim::protocol

