#include <fstream>
#include <sstream>

#include "ocv2/eval.hpp"

namespace ocv2 {

namespace {

constexpr int kReplayVersion = 1;

Json header_json(const Trajectory& tr) {
  return Json{{"type", "header"},
              {"version", kReplayVersion},
              {"config", config_to_json(tr.config)},
              {"config_digest", tr.config_digest},
              {"seed", hex64(tr.seed)},
              {"initial_state", state_to_json(tr.initial)}};
}

Json step_json(std::size_t index, const TrajectoryStep& s) {
  Json actions = Json::array();
  for (Action a : s.actions) actions.push_back(std::string(to_string(a)));
  Json events = Json::array();
  for (const auto& e : s.events) events.push_back(event_to_json(e));
  return Json{{"type", "step"}, {"index", index}, {"actions", std::move(actions)}, {"rewards", s.rewards},
              {"shaped", s.shaped}, {"events", std::move(events)}, {"hash", hex64(s.state_hash)}};
}

std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidArgument("cannot open '" + path + "'");
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

std::vector<std::string> split_lines(const std::string& text) {
  std::vector<std::string> lines;
  std::istringstream is(text);
  std::string line;
  while (std::getline(is, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!line.empty()) lines.push_back(line);
  }
  return lines;
}

Json parse_line(const std::string& line, const std::string& what) {
  try {
    return Json::parse(line);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(what + ": " + e.what());
  }
}

struct Header {
  EnvConfig config;
  std::string digest;
  std::uint64_t seed = 0;
  GameState initial;
};

Header parse_header(const std::vector<std::string>& lines) {
  if (lines.empty()) throw ParseError("replay: empty file");
  const Json h = parse_line(lines.front(), "replay header");
  try {
    if (h.at("type") != "header") throw ParseError("replay: first line is not a header");
    if (h.at("version").get<int>() != kReplayVersion) throw ParseError("replay: unsupported version");
    Header out;
    out.config = config_from_json(h.at("config"));
    out.digest = h.at("config_digest").get<std::string>();
    out.seed = parse_hex64(h.at("seed").get<std::string>());
    out.initial = state_from_json(h.at("initial_state"));
    if (config_digest(out.config) != out.digest) throw ParseError("replay: config digest mismatch");
    check_state(out.config, out.initial);
    return out;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("replay header: ") + e.what());
  } catch (const InvalidArgument& e) {
    throw ParseError(std::string("replay header: ") + e.what());
  }
}

std::vector<Action> parse_actions(const Json& j, int agents) {
  std::vector<Action> actions;
  for (const auto& a : j.at("actions")) actions.push_back(parse_action(a.get<std::string>()));
  if (static_cast<int>(actions.size()) != agents) throw ParseError("wrong number of actions");
  return actions;
}

}  // namespace

std::string replay_to_string(const Trajectory& tr) {
  std::string out = header_json(tr).dump() + "\n";
  for (std::size_t k = 0; k < tr.steps.size(); ++k) out += step_json(k, tr.steps[k]).dump() + "\n";
  out += Json{{"type", "footer"}, {"steps", tr.steps.size()}, {"final_hash", hex64(tr.final_hash)}}.dump() + "\n";
  return out;
}

void save_replay(const Trajectory& tr, const std::string& path) { write_file_atomic(path, replay_to_string(tr)); }

Trajectory replay_from_string(const std::string& text) {
  const auto lines = split_lines(text);
  Header h = parse_header(lines);
  Trajectory tr;
  tr.config = h.config;
  tr.config_digest = h.digest;
  tr.seed = h.seed;
  tr.initial = std::move(h.initial);
  bool footer = false;
  for (std::size_t k = 1; k < lines.size(); ++k) {
    const Json j = parse_line(lines[k], "replay line " + std::to_string(k + 1));
    try {
      const std::string type = j.at("type").get<std::string>();
      if (footer) throw ParseError("content after footer");
      if (type == "step") {
        if (j.at("index").get<std::size_t>() != tr.steps.size()) throw ParseError("step index out of order");
        TrajectoryStep s;
        s.actions = parse_actions(j, tr.config.num_agents());
        s.rewards = j.at("rewards").get<std::vector<double>>();
        s.shaped = j.at("shaped").get<std::vector<double>>();
        for (const auto& e : j.at("events")) s.events.push_back(event_from_json(e));
        s.state_hash = parse_hex64(j.at("hash").get<std::string>());
        tr.steps.push_back(std::move(s));
      } else if (type == "footer") {
        if (j.at("steps").get<std::size_t>() != tr.steps.size()) throw ParseError("footer step count mismatch");
        tr.final_hash = parse_hex64(j.at("final_hash").get<std::string>());
        footer = true;
      } else {
        throw ParseError("unknown line type '" + type + "'");
      }
    } catch (const nlohmann::json::exception& e) {
      throw ParseError("replay line " + std::to_string(k + 1) + ": " + e.what());
    } catch (const Error& e) {
      throw ParseError("replay line " + std::to_string(k + 1) + ": " + e.what());
    }
  }
  if (!footer) throw ParseError("replay: missing footer");
  return tr;
}

Trajectory load_replay(const std::string& path) { return replay_from_string(read_text(path)); }

VerifyResult verify_replay_text(const std::string& text) {
  VerifyResult r;
  const auto lines = split_lines(text);
  Header h;
  try {
    h = parse_header(lines);
  } catch (const Error& e) {
    return {false, std::nullopt, e.what()};
  }
  GameState s = h.initial;
  std::size_t steps = 0;
  auto fail = [&](std::size_t step, const std::string& msg) {
    return VerifyResult{false, step, "step " + std::to_string(step) + ": " + msg};
  };
  for (std::size_t k = 1; k < lines.size(); ++k) {
    Json j;
    try {
      j = Json::parse(lines[k]);
    } catch (const nlohmann::json::exception&) {
      return fail(steps, "malformed line");
    }
    const std::string type = j.value("type", std::string());
    if (type == "footer") {
      try {
        if (j.at("steps").get<std::size_t>() != steps) return fail(steps, "footer step count mismatch");
        if (parse_hex64(j.at("final_hash").get<std::string>()) != state_hash(s)) {
          return fail(steps, "final hash mismatch");
        }
      } catch (const std::exception& e) {
        return fail(steps, std::string("bad footer: ") + e.what());
      }
      if (k + 1 != lines.size()) return fail(steps, "content after footer");
      r.message = "ok: " + std::to_string(steps) + " steps";
      return r;
    }
    if (type != "step") return fail(steps, "unexpected line");
    try {
      if (j.at("index").get<std::size_t>() != steps) return fail(steps, "step index out of order");
      const auto actions = parse_actions(j, h.config.num_agents());
      const std::uint64_t expected = parse_hex64(j.at("hash").get<std::string>());
      step_inplace(h.config, s, actions);
      if (state_hash(s) != expected) return fail(steps, "state hash mismatch");
    } catch (const std::exception& e) {
      return fail(steps, e.what());
    }
    ++steps;
  }
  return fail(steps, "missing footer");
}

VerifyResult verify_replay(const std::string& path) {
  try {
    return verify_replay_text(read_text(path));
  } catch (const Error& e) {
    return {false, std::nullopt, e.what()};
  }
}

}  // namespace ocv2
