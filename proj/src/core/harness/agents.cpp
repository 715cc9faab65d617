#include "harness/agents.hpp"

#include <poll.h>
#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

#include <array>
#include <cerrno>
#include <chrono>
#include <cstring>
#include <mutex>
#include <stdexcept>

#include "dom/dom.hpp"
#include "dom/selector.hpp"
#include "perturb/rng.hpp"

namespace webstress::harness {

using nlohmann::json;
using site::ActionType;

namespace {

constexpr std::array kDismissIds = {"modal-ok", "modal-decline", "modal-close"};
constexpr int kProcessTimeoutMs = 60'000;

dom::DomTree parse_or_empty(const std::string& html) {
  try {
    return dom::parse_html(html);
  } catch (const dom::ParseError&) {
    return {};
  }
}

bool present(const dom::DomTree& tree, const std::string& selector) {
  try {
    return !dom::query(tree, dom::parse_selector(selector)).empty();
  } catch (const dom::SelectorError&) {
    return false;
  }
}

void collect_candidates(const dom::DomNode& node, std::vector<std::string>& clicks, std::vector<std::string>& inputs) {
  if (!node.is_element()) return;
  if (const auto* id = node.attr("id")) {
    clicks.push_back("#" + *id);
    if (node.tag == "input" || node.tag == "textarea") inputs.push_back("#" + *id);
  } else if (const auto* name = node.attr("name"); name && (node.tag == "input" || node.tag == "textarea")) {
    inputs.push_back("[name=\"" + *name + "\"]");
  }
  for (const auto& c : node.children) collect_candidates(c, clicks, inputs);
}

}  // namespace

// --- oracle ------------------------------------------------------------------

OracleAgent::OracleAgent(const eval::TaskSpec& task) : task_(task) {}

AgentMessage OracleAgent::message_for(const eval::GoldenAction& a) {
  AgentMessage m;
  switch (a.type) {
    case ActionType::click: m = click(a.selector); break;
    case ActionType::fill: m = fill(a.selector, a.text); break;
    case ActionType::type: m = type_text(a.text); break;
    case ActionType::hotkey: m = hotkey(a.keys); break;
    default: m = simple(a.type); break;
  }
  return m;
}

json OracleAgent::next_action(const Observation& observation) {
  const dom::DomTree tree = parse_or_empty(observation.dom);
  if (present(tree, "#modal-overlay")) {
    for (const char* id : kDismissIds) {
      const std::string sel = std::string("#") + id;
      if (present(tree, sel)) return click(sel).to_json();
    }
  }
  const bool last_step = observation.remaining <= 1;
  if (pending_) {
    const auto& a = task_.golden[*pending_];
    if (!a.expect.empty() && !present(tree, a.expect)) {
      if (last_step) return simple(ActionType::fail).to_json();
      return message_for(a).to_json();
    }
  }
  if (next_ < task_.golden.size()) {
    if (last_step) return simple(ActionType::fail).to_json();
    pending_ = next_;
    return message_for(task_.golden[next_++]).to_json();
  }
  return simple(ActionType::done).to_json();
}

// --- random ------------------------------------------------------------------

RandomAgent::RandomAgent(std::uint64_t seed) : seed_(seed) {}

json RandomAgent::next_action(const Observation& observation) {
  static constexpr std::array kWords = {"lamp", "notes", "meeting", "blue", "2024", "hello"};
  perturb::RngStream rng({seed_, perturb::fnv1a("random-agent"), static_cast<std::uint64_t>(observation.step)}, "act");
  const dom::DomTree tree = parse_or_empty(observation.dom);
  std::vector<std::string> clicks, inputs;
  for (const auto& r : tree.roots) collect_candidates(r, clicks, inputs);

  const double u = rng.uniform();
  if (u < 0.55 && !clicks.empty()) return click(clicks[rng.below(clicks.size())]).to_json();
  if (u < 0.70 && !inputs.empty()) {
    return fill(inputs[rng.below(inputs.size())], kWords[rng.below(kWords.size())]).to_json();
  }
  if (u < 0.80) return type_text(kWords[rng.below(kWords.size())]).to_json();
  if (u < 0.85) return hotkey(rng.bernoulli(0.5) ? "Enter" : "Ctrl+A").to_json();
  if (u < 0.97) return simple(ActionType::wait).to_json();
  return simple(ActionType::done).to_json();
}

json AlwaysDoneAgent::next_action(const Observation&) { return simple(ActionType::done).to_json(); }

json WaitAgent::next_action(const Observation&) { return simple(ActionType::wait).to_json(); }

// --- subprocess ----------------------------------------------------------------

ProcessAgent::ProcessAgent(std::string command, std::string id) : command_(std::move(command)), id_(std::move(id)) {
  if (command_.empty()) throw std::invalid_argument("external agent needs a command");
}

ProcessAgent::~ProcessAgent() { stop(); }

void ProcessAgent::start() {
  static std::once_flag ignore_sigpipe;
  std::call_once(ignore_sigpipe, [] { ::signal(SIGPIPE, SIG_IGN); });

  int in[2], out[2];
  if (::pipe(in) != 0) throw std::runtime_error("pipe failed");
  if (::pipe(out) != 0) {
    ::close(in[0]);
    ::close(in[1]);
    throw std::runtime_error("pipe failed");
  }
  const pid_t pid = ::fork();
  if (pid < 0) throw std::runtime_error("fork failed");
  if (pid == 0) {
    ::dup2(in[0], STDIN_FILENO);
    ::dup2(out[1], STDOUT_FILENO);
    ::close(in[0]);
    ::close(in[1]);
    ::close(out[0]);
    ::close(out[1]);
    ::execl("/bin/sh", "sh", "-c", command_.c_str(), static_cast<char*>(nullptr));
    ::_exit(127);
  }
  ::close(in[0]);
  ::close(out[1]);
  pid_ = pid;
  to_child_ = in[1];
  from_child_ = out[0];
}

void ProcessAgent::stop() {
  if (to_child_ >= 0) ::close(to_child_);
  if (from_child_ >= 0) ::close(from_child_);
  to_child_ = from_child_ = -1;
  if (pid_ > 0) {
    int status = 0;
    // Give the agent a moment to exit after EOF, then insist.
    for (int i = 0; i < 50; ++i) {
      if (::waitpid(pid_, &status, WNOHANG) == pid_) {
        pid_ = -1;
        return;
      }
      ::usleep(10'000);
    }
    ::kill(pid_, SIGKILL);
    ::waitpid(pid_, &status, 0);
    pid_ = -1;
  }
}

json ProcessAgent::next_action(const Observation& observation) {
  if (pid_ < 0) start();
  const std::string line = observation.to_json().dump() + "\n";
  std::size_t written = 0;
  while (written < line.size()) {
    const ssize_t n = ::write(to_child_, line.data() + written, line.size() - written);
    if (n < 0 && errno == EINTR) continue;
    if (n <= 0) return json("agent process closed its input");
    written += static_cast<std::size_t>(n);
  }

  const auto deadline = std::chrono::steady_clock::now() + std::chrono::milliseconds(kProcessTimeoutMs);
  for (;;) {
    if (auto nl = buffer_.find('\n'); nl != std::string::npos) {
      std::string reply = buffer_.substr(0, nl);
      buffer_.erase(0, nl + 1);
      try {
        return json::parse(reply);
      } catch (const json::parse_error&) {
        return json(reply);  // not JSON; the episode records it as malformed
      }
    }
    const auto left = std::chrono::duration_cast<std::chrono::milliseconds>(deadline - std::chrono::steady_clock::now());
    if (left.count() <= 0) return json("agent process timed out");
    pollfd pfd{from_child_, POLLIN, 0};
    const int ready = ::poll(&pfd, 1, static_cast<int>(left.count()));
    if (ready < 0 && errno == EINTR) continue;
    if (ready <= 0) return json("agent process timed out");
    char buf[4096];
    const ssize_t n = ::read(from_child_, buf, sizeof buf);
    if (n < 0 && errno == EINTR) continue;
    if (n <= 0) return json("agent process exited");
    buffer_.append(buf, static_cast<std::size_t>(n));
  }
}

// --- factory -------------------------------------------------------------------

bool is_known_agent(const std::string& name) {
  return name == "oracle" || name == "random" || name == "always-done" || name == "wait" || name == "external";
}

std::unique_ptr<Agent> make_agent(const std::string& name, const AgentContext& context) {
  if (name == "oracle") {
    if (!context.task) throw std::invalid_argument("oracle agent needs a task");
    return std::make_unique<OracleAgent>(*context.task);
  }
  if (name == "random") return std::make_unique<RandomAgent>(context.seed);
  if (name == "always-done") return std::make_unique<AlwaysDoneAgent>();
  if (name == "wait") return std::make_unique<WaitAgent>();
  if (name == "external") return std::make_unique<ProcessAgent>(context.command);
  throw std::invalid_argument("unknown agent '" + name + "'");
}

}  // namespace webstress::harness
