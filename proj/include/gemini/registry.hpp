#pragma once

#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>

#include "gemini/config.hpp"
#include "gemini/ecs.hpp"

namespace gemini {

class Registry;

/// What an initializer sees while a world is being built.
struct BuildContext {
  const Registry& registry;
  /// Directory of the configuration file that contains the call.
  std::filesystem::path base_dir;

  std::filesystem::path resolve(const std::string& path) const {
    std::filesystem::path p(path);
    return p.is_absolute() || base_dir.empty() ? p : base_dir / p;
  }
};

/// Maps dotted module paths to back-end factories.
class Registry {
 public:
  using ComponentFactory = std::function<std::unique_ptr<Component>()>;
  using ProcessorFactory = std::function<std::unique_ptr<Processor>(const ValueMap& params)>;
  using Initializer = std::function<Value(const ValueMap& args, const BuildContext& ctx)>;

  void add_component(std::string module, ComponentFactory f) { components_[std::move(module)] = std::move(f); }
  void add_processor(std::string module, ProcessorFactory f) { processors_[std::move(module)] = std::move(f); }
  void add_function(std::string module, Initializer f) { functions_[std::move(module)] = std::move(f); }

  template <typename C>
  void add_component(std::string module) {
    add_component(std::move(module), [] { return std::make_unique<C>(); });
  }

  std::unique_ptr<Component> make_component(const std::string& module) const {
    return lookup(components_, module, "component")();
  }

  std::unique_ptr<Processor> make_processor(const std::string& module, const ValueMap& params) const {
    return lookup(processors_, module, "processor")(params);
  }

  const Initializer& function(const std::string& module) const { return lookup(functions_, module, "function"); }

  bool resolves(CommandKind kind, const std::string& module) const {
    switch (kind) {
      case CommandKind::entity: return true;
      case CommandKind::component: return components_.count(module) > 0;
      case CommandKind::processor: return processors_.count(module) > 0;
      case CommandKind::function: return functions_.count(module) > 0;
    }
    return false;
  }

 private:
  template <typename Map>
  static const typename Map::mapped_type& lookup(const Map& map, const std::string& module, std::string_view what) {
    auto it = map.find(module);
    if (it == map.end()) fail(Errc::UnknownModulePath, "no " + std::string(what) + " registered at '" + module + "'");
    return it->second;
  }

  std::map<std::string, ComponentFactory> components_;
  std::map<std::string, ProcessorFactory> processors_;
  std::map<std::string, Initializer> functions_;
};

struct BuildOptions {
  /// Replaces the `seed` attribute of every component that has one.
  std::optional<std::uint64_t> seed_override;
};

namespace detail {

inline bool is_call(const Value& v) {
  if (!v.is_map()) return false;
  const auto& m = v.map();
  if (!find(m, "function")) return false;
  for (const auto& e : m)
    if (e.key != "function" && e.key != "args") return false;
  return true;
}

inline Value evaluate(const Value& v, const ConfigDocument& doc, const BuildContext& ctx) {
  if (is_call(v)) {
    const auto& name = as_string(*find(v.map(), "function"), "function");
    auto it = doc.commands.find(name);
    if (it == doc.commands.end()) throw Error(Errc::UnknownCommand, "function '" + name + "' is not declared", v.line);
    if (it->second.kind != CommandKind::function)
      throw Error(Errc::InvalidInvocation, "'" + name + "' is not a function command", v.line);
    Value args = ValueMap{};
    if (const Value* a = find(v.map(), "args"); a && !a->is_null()) {
      if (!a->is_map()) throw Error(Errc::InvalidInvocation, "'args' of '" + name + "' must be a mapping", a->line);
      args = evaluate(*a, doc, ctx);
    }
    const auto& fn = ctx.registry.function(it->second.module);
    try {
      Value out = fn(args.map(), ctx);
      out.line = v.line;
      out.column = v.column;
      return out;
    } catch (const Error& e) {
      if (e.code() == Errc::InitializerFailure) throw;
      throw Error(Errc::InitializerFailure, name + ": " + e.what(), v.line);
    } catch (const std::exception& e) {
      throw Error(Errc::InitializerFailure, name + ": " + e.what(), v.line);
    }
  }
  if (v.is_list()) {
    ValueList out;
    for (const auto& item : v.list()) out.push_back(evaluate(item, doc, ctx));
    Value r{std::move(out)};
    r.line = v.line;
    r.column = v.column;
    return r;
  }
  if (v.is_map()) {
    ValueMap out;
    for (const auto& e : v.map()) out.push_back({e.key, evaluate(e.value, doc, ctx)});
    Value r{std::move(out)};
    r.line = v.line;
    r.column = v.column;
    return r;
  }
  return v;
}

[[noreturn]] inline void rethrow_at(const Error& e, const CommandInvocation& inv) {
  if (e.line()) throw;
  throw Error(e.code(), e.message() + " (in '" + inv.command + "')", inv.line);
}

}  // namespace detail

/// Instantiates a flattened, validated document: entities and components in
/// description order, then processors in description order.
inline World build_world(const ConfigDocument& doc, const Registry& registry, const BuildOptions& options = {}) {
  validate(doc);
  if (!doc.configurations.empty())
    fail(Errc::InvalidInvocation, "build_world needs a flattened document; call resolve_imports first");

  World world;
  for (const auto& inv : doc.description) {
    const CommandBinding& binding = doc.commands.at(inv.command);
    BuildContext ctx{registry, inv.base_dir};
    try {
      switch (binding.kind) {
        case CommandKind::entity:
          world.create_entity(inv.entity);
          break;
        case CommandKind::component: {
          auto entity = world.find_entity(*inv.entity);
          if (!entity) fail(Errc::UnknownEntity, "entity '" + *inv.entity + "' is not defined before use");
          auto component = registry.make_component(binding.module);
          for (const auto& attr : inv.attributes) component->assign(attr.key, detail::evaluate(attr.value, doc, ctx));
          if (options.seed_override && component->has_attribute("seed"))
            component->assign("seed", Value(*options.seed_override));
          component->validate();
          world.attach(*entity, std::move(component));
          break;
        }
        case CommandKind::processor: {
          Value params = detail::evaluate(Value{inv.attributes}, doc, ctx);
          auto processor = registry.make_processor(binding.module, params.map());
          if (inv.entity) {
            auto entity = world.find_entity(*inv.entity);
            if (!entity) fail(Errc::UnknownEntity, "entity '" + *inv.entity + "' is not defined before use");
            processor->set_target(*entity);
          }
          world.register_processor(std::move(processor));
          break;
        }
        case CommandKind::function:
          break;  // rejected by validate()
      }
    } catch (const Error& e) {
      detail::rethrow_at(e, inv);
    }
  }
  return world;
}

}  // namespace gemini
