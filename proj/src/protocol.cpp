#include <cmath>
#include <istream>
#include <limits>
#include <ostream>
#include <string>

#include "mixbo/driver.hpp"

namespace mixbo {

namespace {

using nlohmann::json;

double observed_value(const json& v) {
  if (v.is_number()) return v.get<double>();
  // JSON has no NaN/inf literals; null and the usual spellings mark a failed evaluation.
  if (v.is_null()) return std::numeric_limits<double>::quiet_NaN();
  if (v.is_string()) {
    const auto s = v.get<std::string>();
    if (s == "nan" || s == "NaN") return std::numeric_limits<double>::quiet_NaN();
    if (s == "inf" || s == "Infinity") return std::numeric_limits<double>::infinity();
  }
  throw ProtocolError("observe values must be numbers, got " + v.dump());
}

}  // namespace

int serve_protocol(Optimizer& optimizer, std::istream& in, std::ostream& out, std::ostream& err) {
  try {
    while (!optimizer.finished()) {
      const std::size_t batch = optimizer.batch_index();
      json msg;
      msg["suggest"] = json::array();
      for (const auto& a : optimizer.suggest()) msg["suggest"].push_back(assignment_to_json(a));
      msg["batch"] = batch;
      out << msg.dump() << '\n' << std::flush;

      std::string line;
      do {
        if (!std::getline(in, line))
          throw ProtocolError("input closed while waiting for observations of batch " + std::to_string(batch));
      } while (line.find_first_not_of(" \t\r") == std::string::npos);
      json reply;
      try {
        reply = json::parse(line);
      } catch (const json::parse_error& e) {
        throw ProtocolError(std::string("malformed JSON: ") + e.what());
      }
      if (!reply.is_object() || !reply.contains("observe") || !reply["observe"].is_array())
        throw ProtocolError("expected {\"observe\":[...],\"batch\":" + std::to_string(batch) + "}");
      if (!reply.contains("batch") || !reply["batch"].is_number_integer() ||
          reply["batch"].get<long long>() != static_cast<long long>(batch))
        throw ProtocolError("observation is for the wrong batch (expected " + std::to_string(batch) + ")");
      std::vector<double> values;
      for (const auto& v : reply["observe"]) values.push_back(observed_value(v));
      optimizer.observe(values);
    }
    const auto [assignment, value] = optimizer.best();
    json done{{"done", true}, {"best", assignment_to_json(assignment)},
              {"evaluations", optimizer.trials().size()}};
    done["value"] = std::isfinite(value) ? json(value) : json(nullptr);
    out << done.dump() << '\n' << std::flush;
    return 0;
  } catch (const ProtocolError& e) {
    err << "protocol error: " << e.what() << '\n';
    return 2;
  } catch (const ValidationError& e) {
    err << "validation error: " << e.what() << '\n';
    return 2;
  }
}

}  // namespace mixbo
