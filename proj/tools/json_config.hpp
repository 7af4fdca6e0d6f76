#pragma once

#include <CLI11.hpp>
#include <json.hpp>

#include <istream>
#include <string>
#include <vector>

namespace peelkit::cli {

// JSON config files for CLI11. Top-level keys name global flags; an object
// keyed by a subcommand name holds that subcommand's flags:
//   {"threads": 4, "encode": {"layers": 4, "mesh": "body.obj"}}
class JsonConfig : public CLI::Config {
 public:
  std::string to_config(const CLI::App* app, bool default_also, bool, std::string) const override {
    return dump(app, default_also).dump(2) + "\n";
  }

  std::vector<CLI::ConfigItem> from_config(std::istream& input) const override {
    nlohmann::json j;
    try {
      input >> j;
    } catch (const nlohmann::json::exception& e) {
      throw CLI::FileError(std::string("malformed config: ") + e.what());
    }
    if (!j.is_object()) {
      throw CLI::FileError("config must be a JSON object");
    }
    std::vector<CLI::ConfigItem> items;
    collect(j, {}, items);
    return items;
  }

 private:
  static std::string scalar(const nlohmann::json& value, const std::string& key) {
    if (value.is_string()) {
      return value.get<std::string>();
    }
    if (value.is_boolean()) {
      return value.get<bool>() ? "true" : "false";
    }
    if (value.is_number()) {
      return value.dump();
    }
    throw CLI::ConversionError("config value for '" + key + "' must be a string, number or boolean");
  }

  static void collect(const nlohmann::json& object, const std::vector<std::string>& parents, std::vector<CLI::ConfigItem>& items) {
    for (const auto& [key, value] : object.items()) {
      if (value.is_object()) {
        auto nested = parents;
        nested.push_back(key);
        collect(value, nested, items);
        continue;
      }
      CLI::ConfigItem item;
      item.parents = parents;
      item.name = key;
      if (value.is_array()) {
        for (const auto& element : value) {
          item.inputs.push_back(scalar(element, key));
        }
      } else {
        item.inputs.push_back(scalar(value, key));
      }
      items.push_back(std::move(item));
    }
  }

  static nlohmann::json dump(const CLI::App* app, bool default_also) {
    nlohmann::json j = nlohmann::json::object();
    for (const CLI::Option* option : app->get_options({})) {
      if (option->get_lnames().empty() || !option->get_configurable()) {
        continue;
      }
      const std::string name = option->get_lnames().front();
      const auto results = option->results();
      if (!results.empty()) {
        j[name] = results.size() == 1 ? nlohmann::json(results.front()) : nlohmann::json(results);
      } else if (default_also && !option->get_default_str().empty()) {
        j[name] = option->get_default_str();
      }
    }
    for (const CLI::App* sub : app->get_subcommands({})) {
      nlohmann::json nested = dump(sub, default_also);
      if (!nested.empty()) {
        j[sub->get_name()] = std::move(nested);
      }
    }
    return j;
  }
};

} // namespace peelkit::cli
