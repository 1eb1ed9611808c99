#pragma once

#include <json.hpp>

#include "sesstool/session_analysis.hpp"
#include "sesstool/slicing.hpp"
#include "sesstool/system.hpp"
#include "sesstool/typing.hpp"

namespace sess {

// JSON views of the checker reports. Keys are stable; the schema is
// documented in README.md.
nlohmann::json to_json(const SessionReport& r);
nlohmann::json to_json(const Typing& t);
nlohmann::json to_json(const TypeError& e);
nlohmann::json to_json(const InferResult& r);
nlohmann::json to_json(const CheckReport& r);
nlohmann::json to_json(const SliceReport& r);
nlohmann::json to_json(const SystemReport& r);
nlohmann::json to_json(const Verdict& v);

}  // namespace sess
