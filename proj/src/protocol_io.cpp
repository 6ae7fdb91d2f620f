#include <fstream>
#include <sstream>

#include "json.hpp"

#include "hybrid/protocol.hpp"

namespace hybrid {

namespace {

using nlohmann::json;

[[noreturn]] void malformed(const std::string& what) { throw Error(ErrorCode::MalformedScript, what); }

StepKind parse_kind(const std::string& s) {
  for (StepKind k : {StepKind::Prepare, StepKind::Interact, StepKind::MeasureMediator,
                     StepKind::ConditionalLocalOp, StepKind::VerifyEntanglement})
    if (s == step_kind_name(k)) return k;
  malformed("unknown step kind '" + s + "'");
}

ProtocolStep parse_step(const json& j, std::size_t index) {
  const std::string where = "steps[" + std::to_string(index) + "]";
  if (!j.is_object()) malformed(where + " is not an object");
  ProtocolStep step;
  step.kind = parse_kind(j.at("kind").get<std::string>());
  switch (step.kind) {
    case StepKind::Prepare: {
      const std::string mode = j.value("mode", std::string("product"));
      if (mode == "product") {
        step.conditioned = false;
        step.states = {j.at("state").get<std::string>()};
      } else if (mode == "conditioned") {
        step.conditioned = true;
        step.states = j.at("states").get<std::vector<std::string>>();
        if (step.states.size() != 2) malformed(where + ".states must list two states");
      } else {
        malformed(where + ".mode must be 'product' or 'conditioned'");
      }
      break;
    }
    case StepKind::Interact: {
      const auto pair = j.at("pair").get<std::vector<std::string>>();
      if (pair.size() != 2) malformed(where + ".pair must name two parties");
      step.pair = {parse_party(pair[0]), parse_party(pair[1])};
      step.coupling = j.value("coupling", 1.0);
      step.duration = j.value("duration", 1.0);
      step.controlled_on_bit = j.value("controlled_on_bit", false);
      break;
    }
    case StepKind::ConditionalLocalOp: {
      step.target = parse_party(j.at("target").get<std::string>());
      const auto ops = j.at("ops").get<std::vector<std::string>>();
      if (ops.size() != 2) malformed(where + ".ops must give one gate per bit value");
      step.ops = {ops[0], ops[1]};
      break;
    }
    case StepKind::MeasureMediator:
    case StepKind::VerifyEntanglement:
      break;
  }
  return step;
}

}  // namespace

ProtocolScript parse_script(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    malformed(std::string("not valid JSON: ") + e.what());
  }
  try {
    ProtocolScript script;
    script.name = doc.value("name", std::string());
    const json& steps = doc.at("steps");
    if (!steps.is_array()) malformed("'steps' must be an array");
    for (std::size_t i = 0; i < steps.size(); ++i) script.steps.push_back(parse_step(steps[i], i));
    return script;
  } catch (const json::exception& e) {
    malformed(e.what());
  }
}

ProtocolScript read_script(const std::string& path) {
  std::ifstream in(path);
  if (!in) malformed("cannot open script '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_script(buf.str());
}

std::string script_to_json(const ProtocolScript& script) {
  json steps = json::array();
  for (const ProtocolStep& s : script.steps) {
    json j{{"kind", step_kind_name(s.kind)}};
    switch (s.kind) {
      case StepKind::Prepare:
        if (s.conditioned) {
          j["mode"] = "conditioned";
          j["states"] = s.states;
        } else {
          j["mode"] = "product";
          j["state"] = s.states.empty() ? std::string() : s.states[0];
        }
        break;
      case StepKind::Interact:
        j["pair"] = {party_name(s.pair[0]), party_name(s.pair[1])};
        j["coupling"] = s.coupling;
        j["duration"] = s.duration;
        j["controlled_on_bit"] = s.controlled_on_bit;
        break;
      case StepKind::ConditionalLocalOp:
        j["target"] = party_name(s.target);
        j["ops"] = {s.ops[0], s.ops[1]};
        break;
      default:
        break;
    }
    steps.push_back(j);
  }
  return json{{"name", script.name}, {"steps", steps}}.dump(2);
}

}  // namespace hybrid
