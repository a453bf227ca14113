#pragma once

#include <initializer_list>
#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

#include "xprace/errors.hpp"

namespace xprace {

using Json = nlohmann::json;

/// Strict reader over a JSON object: optional keys overwrite defaults,
/// unknown keys are rejected so typos do not silently fall back.
class JsonFields {
 public:
  JsonFields(const Json& obj, std::string context) : obj_(obj), context_(std::move(context)) {
    if (!obj_.is_object()) throw ConfigError(context_ + ": expected an object");
  }

  template <class T>
  void get(std::string_view key, T& out) const {
    auto it = obj_.find(std::string(key));
    if (it == obj_.end()) return;
    try {
      out = it->template get<T>();
    } catch (const nlohmann::json::exception& e) {
      throw ConfigError(context_ + "." + std::string(key) + ": " + e.what());
    }
  }

  const Json* find(std::string_view key) const {
    auto it = obj_.find(std::string(key));
    return it == obj_.end() ? nullptr : &*it;
  }

  void allow_only(std::initializer_list<std::string_view> keys) const {
    for (auto it = obj_.begin(); it != obj_.end(); ++it) {
      bool known = false;
      for (auto k : keys) known = known || it.key() == k;
      if (!known) throw ConfigError(context_ + ": unknown key '" + it.key() + "'");
    }
  }

  const std::string& context() const noexcept { return context_; }

 private:
  const Json& obj_;
  std::string context_;
};

}  // namespace xprace
