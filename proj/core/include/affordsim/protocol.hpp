#pragma once

// Reasoner wire protocol: one JSON object per line over a byte stream, either
// a TCP connection or a child process speaking on its standard pipes. Field
// names and the version tag are load-bearing;
//   request:  {"v":1,"episode":...,"step":...,"target":{"id":...,"class":...},
//              "candidates":["available","unavailable"],"observation":{...},
//              "references":{"available":...,"unavailable":...}}
//   response: {"v":1,"state":"available"|"unavailable",
//              "category":"Occupied"|"Used"|"Dirty"|null,"confidence":float}
// Latent attributes never appear in the observation. Visibility is decided on
// the client side; no request is sent for an object the agent cannot see.

#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <set>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "affordsim/reasoner.hpp"
#include "affordsim/task_types.hpp"

namespace affordsim::protocol {

using Json = nlohmann::json;

inline constexpr int kProtocolVersion = 1;
inline constexpr int kDefaultTimeoutMs = 5000;

struct ProtocolError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
// No response within the deadline (or the peer vanished mid-read).
struct TimeoutError : ProtocolError {
  using ProtocolError::ProtocolError;
};
// The peer answered, but not with a well-formed response record.
struct MalformedResponse : ProtocolError {
  using ProtocolError::ProtocolError;
};

Json make_request(const agent::ReasonerQuery& query,
                  const std::string& object_class,
                  const sim::Observation& observation);
// Throws MalformedResponse unless `line` is a valid response record.
agent::ReasonerVerdict parse_response(const std::string& line);
Json verdict_to_response(const agent::ReasonerVerdict& verdict);

// Line-oriented transport. Implementations are single-owner; they are not
// safe for concurrent use.
class ByteStream {
 public:
  virtual ~ByteStream() = default;
  virtual void send_line(const std::string& line) = 0;
  // One line without the trailing newline. Throws TimeoutError past the
  // deadline, ProtocolError if the peer closed the stream.
  virtual std::string recv_line(int timeout_ms) = 0;
};

// endpoint forms:
//   tcp://HOST:PORT   connect to a listening reasoner server
//   cmd:SHELL-COMMAND spawn a child process and talk over its stdin/stdout
std::unique_ptr<ByteStream> open_endpoint(const std::string& endpoint);

class ExternalReasoner : public agent::Reasoner {
 public:
  explicit ExternalReasoner(const std::string& endpoint,
                            int timeout_ms = kDefaultTimeoutMs);
  // For transports constructed by hand (tests, in-process loopback).
  ExternalReasoner(std::unique_ptr<ByteStream> stream, int timeout_ms);
  std::string label() const override { return "external"; }
  agent::ReasonerVerdict assess(const sim::EpisodeState& state,
                                const agent::ReasonerQuery& query) override;

 private:
  std::unique_ptr<ByteStream> stream_;
  int timeout_ms_;
};

// Answer logic of the loopback stub server. Oracle mode needs the episode
// injection lists and reconstructs the truth the simulator would expose: busy
// timers count down one per simulator step, so remaining busy time is the
// injected duration minus the step in the request; sticky conditions (Used,
// Dirty) are reported once per (episode, object) and assumed fixed afterwards,
// matching a recovery agent that cleans before asking again. Thread-safe.
class StubLogic {
 public:
  enum class Mode { Oracle, AlwaysAvailable };

  explicit StubLogic(
      Mode mode,
      std::map<std::string, std::vector<genbench::Injection>> injections = {});

  // Response record for a request record. A malformed request yields a
  // response without a "state" field carrying an "error" note instead.
  Json answer(const Json& request);

 private:
  Mode mode_;
  std::map<std::string, std::vector<genbench::Injection>> injections_;
  std::set<std::pair<std::string, std::string>> reported_;
  std::mutex mu_;
};

StubLogic::Mode stub_mode_from_string(const std::string& s);

// Serves requests from `in` to `out` until end of input (child-process mode).
void serve_stream(StubLogic& logic, std::istream& in, std::ostream& out);

// Accept loop with one thread per connection. port 0 picks a free port.
class TcpServer {
 public:
  TcpServer(StubLogic& logic, const std::string& host, int port);
  ~TcpServer();
  int port() const { return port_; }
  void run();   // blocks until stop()
  void stop();  // safe from another thread

 private:
  StubLogic& logic_;
  int listen_fd_ = -1;
  int port_ = 0;
  std::vector<std::thread> workers_;
};

}  // namespace affordsim::protocol
