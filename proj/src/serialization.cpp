#include "bellproj/serialization.hpp"

#include <cmath>
#include <numbers>
#include <optional>
#include <set>

namespace bellproj {

namespace {
constexpr std::string_view kModule = "serialization";
constexpr double kDeg = std::numbers::pi / 180.0;

[[noreturn]] void fail(const std::string& path, const std::string& what) {
  throw Error(ErrorKind::Config, kModule, (path.empty() ? std::string("<root>") : path) + ": " + what);
}
}  // namespace

Json to_json(const Operator& op) {
  Json entries = Json::array();
  for (int r = 0; r < op.dim(); ++r) {
    Json row = Json::array();
    for (int c = 0; c < op.dim(); ++c) row.push_back(Json::array({op(r, c).real(), op(r, c).imag()}));
    entries.push_back(std::move(row));
  }
  return Json{{"dim", op.dim()}, {"entries", std::move(entries)}};
}

Operator operator_from_json(const Json& j, const std::string& path) {
  if (!j.is_object()) fail(path, "expected an object with dim and entries");
  for (const auto& [key, _] : j.items()) {
    if (key != "dim" && key != "entries") fail(path + "/" + key, "unknown field");
  }
  if (!j.contains("dim") || !j["dim"].is_number_integer()) fail(path + "/dim", "missing or not an integer");
  if (!j.contains("entries") || !j["entries"].is_array()) fail(path + "/entries", "missing or not an array");
  const int dim = j["dim"].get<int>();
  if (dim < 2 || (dim & (dim - 1)) != 0) fail(path + "/dim", "must be a power of 2 >= 2");
  const Json& entries = j["entries"];
  if (static_cast<int>(entries.size()) != dim) fail(path + "/entries", "expected " + std::to_string(dim) + " rows");
  Matrix m(dim, dim);
  for (int r = 0; r < dim; ++r) {
    const std::string row_path = path + "/entries/" + std::to_string(r);
    if (!entries[r].is_array() || static_cast<int>(entries[r].size()) != dim) {
      fail(row_path, "expected " + std::to_string(dim) + " entries");
    }
    for (int c = 0; c < dim; ++c) {
      const Json& e = entries[r][c];
      if (!e.is_array() || e.size() != 2 || !e[0].is_number() || !e[1].is_number()) {
        fail(row_path + "/" + std::to_string(c), "expected [re, im]");
      }
      m(r, c) = Complex(e[0].get<double>(), e[1].get<double>());
    }
  }
  try {
    return Operator(std::move(m));
  } catch (const Error& err) {
    fail(path, err.what());
  }
}

namespace {

void only_fields(const Json& j, const std::string& path, const std::set<std::string>& allowed) {
  for (const auto& [key, _] : j.items()) {
    if (!allowed.contains(key)) fail(path + "/" + key, "unknown field");
  }
}

double number_field(const Json& j, const std::string& path, const std::string& key, std::optional<double> fallback) {
  if (!j.contains(key)) {
    if (fallback) return *fallback;
    fail(path + "/" + key, "missing required field");
  }
  const Json& v = j[key];
  if (!v.is_number() || !std::isfinite(v.get<double>())) fail(path + "/" + key, "expected a finite number");
  return v.get<double>();
}

int target_field(const Json& j, const std::string& path, int fallback) {
  if (!j.contains("target")) return fallback;
  if (!j["target"].is_number_integer()) fail(path + "/target", "expected an integer");
  return j["target"].get<int>();
}

}  // namespace

Json to_json(const PulseSequence& seq) {
  Json events = Json::array();
  for (const auto& element : seq.events) {
    if (const auto* p = std::get_if<PulseEvent>(&element)) {
      Json e{{"type", "pulse"},
             {"phase_deg", p->phase_rad / kDeg},
             {"flip_deg", p->flip_rad / kDeg},
             {"duration_us", p->duration_s * 1e6}};
      if (p->kind == PulseKind::selective) e["target"] = p->target;
      events.push_back(std::move(e));
    } else if (const auto* d = std::get_if<Delay>(&element)) {
      events.push_back(Json{{"type", "delay"}, {"duration_us", d->duration_s * 1e6}});
    } else {
      const auto& f = std::get<FrameRotation>(element);
      events.push_back(Json{{"type", "zrot"}, {"angle_deg", f.angle_rad / kDeg}, {"target", f.target}});
    }
  }
  return Json{{"repeat", seq.repeat}, {"events", std::move(events)}};
}

PulseSequence sequence_from_json(const Json& j, const std::string& path) {
  if (!j.is_object()) fail(path, "expected an object with repeat and events");
  only_fields(j, path, {"repeat", "events"});
  PulseSequence seq;
  if (j.contains("repeat")) {
    if (!j["repeat"].is_number_integer()) fail(path + "/repeat", "expected an integer");
    seq.repeat = j["repeat"].get<int>();
  }
  if (!j.contains("events") || !j["events"].is_array()) fail(path + "/events", "missing or not an array");
  const Json& events = j["events"];
  for (std::size_t k = 0; k < events.size(); ++k) {
    const std::string ep = path + "/events/" + std::to_string(k);
    const Json& e = events[k];
    if (!e.is_object() || !e.contains("type") || !e["type"].is_string()) fail(ep + "/type", "missing or not a string");
    const std::string type = e["type"].get<std::string>();
    if (type == "pulse") {
      only_fields(e, ep, {"type", "phase_deg", "flip_deg", "duration_us", "target"});
      PulseEvent p;
      p.phase_rad = number_field(e, ep, "phase_deg", 0.0) * kDeg;
      p.flip_rad = number_field(e, ep, "flip_deg", {}) * kDeg;
      p.duration_s = number_field(e, ep, "duration_us", 0.0) * 1e-6;
      if (e.contains("target")) {
        p.kind = PulseKind::selective;
        p.target = target_field(e, ep, 0);
      }
      seq.events.emplace_back(p);
    } else if (type == "delay") {
      only_fields(e, ep, {"type", "duration_us"});
      seq.events.emplace_back(Delay{number_field(e, ep, "duration_us", {}) * 1e-6});
    } else if (type == "zrot") {
      only_fields(e, ep, {"type", "angle_deg", "target"});
      seq.events.emplace_back(FrameRotation{target_field(e, ep, -1), number_field(e, ep, "angle_deg", {}) * kDeg});
    } else {
      fail(ep + "/type", "expected pulse, delay or zrot");
    }
  }
  try {
    seq.validate();
  } catch (const Error& err) {
    fail(path, err.what());
  }
  return seq;
}

}  // namespace bellproj
