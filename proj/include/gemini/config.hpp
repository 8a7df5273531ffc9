#pragma once

#include <algorithm>
#include <charconv>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <map>
#include <optional>
#include <regex>
#include <sstream>
#include <string>
#include <vector>

#include <yaml-cpp/eventhandler.h>
#include <yaml-cpp/exceptions.h>
#include <yaml-cpp/mark.h>
#include <yaml-cpp/parser.h>

#include "gemini/error.hpp"
#include "gemini/value.hpp"

namespace gemini {

enum class CommandKind { entity, component, processor, function };

inline std::string_view to_string(CommandKind k) {
  switch (k) {
    case CommandKind::entity: return "entity";
    case CommandKind::component: return "component";
    case CommandKind::processor: return "processor";
    case CommandKind::function: return "function";
  }
  return "?";
}

struct CommandBinding {
  CommandKind kind = CommandKind::entity;
  std::string module;
  bool operator==(const CommandBinding&) const = default;
};

struct ImportRef {
  std::string path;
  std::string prefix;
};

struct CommandInvocation {
  std::string command;
  std::optional<std::string> entity;
  ValueMap attributes;
  /// Directory that relative paths inside the attributes resolve against.
  std::filesystem::path base_dir;
  int line = 0;
};

struct ConfigDocument {
  std::map<std::string, CommandBinding> commands;
  std::vector<ImportRef> configurations;
  std::vector<CommandInvocation> description;
  /// File the document was read from, if any.
  std::filesystem::path source;

  std::filesystem::path base_dir() const { return source.empty() ? std::filesystem::path{} : source.parent_path(); }
};

// ---------------------------------------------------------------------------
// YAML subset reader
// ---------------------------------------------------------------------------

namespace detail {

inline Value plain_scalar(const std::string& s) {
  if (s.empty() || s == "~" || s == "null" || s == "Null" || s == "NULL") return Value{};
  if (s == "true" || s == "True" || s == "TRUE") return Value{true};
  if (s == "false" || s == "False" || s == "FALSE") return Value{false};
  if (s == ".inf" || s == "+.inf" || s == ".Inf" || s == "+.Inf") return Value{std::numeric_limits<double>::infinity()};
  if (s == "-.inf" || s == "-.Inf") return Value{-std::numeric_limits<double>::infinity()};
  if (s == ".nan" || s == ".NaN" || s == ".NAN") return Value{std::numeric_limits<double>::quiet_NaN()};
  static const std::regex int_re("[-+]?[0-9]+");
  static const std::regex float_re(R"([-+]?(\.[0-9]+|[0-9]+(\.[0-9]*)?)([eE][-+]?[0-9]+)?)");
  if (std::regex_match(s, int_re)) {
    std::int64_t v = 0;
    const char* b = s.data() + (s[0] == '+' ? 1 : 0);
    auto [p, ec] = std::from_chars(b, s.data() + s.size(), v);
    if (ec == std::errc() && p == s.data() + s.size()) return Value{v};
  }
  if (std::regex_match(s, float_re)) {
    double v = 0;
    const char* b = s.data() + (s[0] == '+' ? 1 : 0);
    auto [p, ec] = std::from_chars(b, s.data() + s.size(), v);
    if (ec == std::errc() && p == s.data() + s.size()) return Value{v};
  }
  return Value{s};
}

class ValueBuilder : public YAML::EventHandler {
 public:
  std::optional<Value> root;

  void OnDocumentStart(const YAML::Mark&) override {}
  void OnDocumentEnd() override {}

  void OnNull(const YAML::Mark& mark, YAML::anchor_t anchor) override {
    check_anchor(mark, anchor);
    emit(at(Value{}, mark));
  }

  void OnAlias(const YAML::Mark& mark, YAML::anchor_t) override { reject(mark, "aliases are not supported"); }

  void OnScalar(const YAML::Mark& mark, const std::string& tag, YAML::anchor_t anchor,
                const std::string& value) override {
    check_anchor(mark, anchor);
    if (tag == "!") emit(at(Value{value}, mark));  // quoted
    else if (tag == "?" || tag.empty()) emit(at(plain_scalar(value), mark));
    else reject(mark, "tags are not supported");
  }

  void OnSequenceStart(const YAML::Mark& mark, const std::string& tag, YAML::anchor_t anchor,
                       YAML::EmitterStyle::value) override {
    check_tag(mark, tag);
    check_anchor(mark, anchor);
    stack_.push_back({at(Value{ValueList{}}, mark), {}, false});
  }

  void OnSequenceEnd() override { close(); }

  void OnMapStart(const YAML::Mark& mark, const std::string& tag, YAML::anchor_t anchor,
                  YAML::EmitterStyle::value) override {
    check_tag(mark, tag);
    check_anchor(mark, anchor);
    stack_.push_back({at(Value{ValueMap{}}, mark), {}, false});
  }

  void OnMapEnd() override { close(); }

  void OnAnchor(const YAML::Mark& mark, const std::string&) override { reject(mark, "anchors are not supported"); }

 private:
  struct Frame {
    Value value;
    std::optional<std::string> pending_key;
    bool expecting_value;
  };

  static Value at(Value v, const YAML::Mark& m) {
    v.line = m.line + 1;
    v.column = m.column + 1;
    return v;
  }

  [[noreturn]] static void reject(const YAML::Mark& m, const std::string& msg) {
    throw Error(Errc::SyntaxError, msg, m.line + 1, m.column + 1);
  }

  static void check_anchor(const YAML::Mark& m, YAML::anchor_t a) {
    if (a != 0) reject(m, "anchors are not supported");
  }

  static void check_tag(const YAML::Mark& m, const std::string& tag) {
    if (!tag.empty() && tag != "?" && tag != "!") reject(m, "tags are not supported");
  }

  void close() {
    Value done = std::move(stack_.back().value);
    stack_.pop_back();
    emit(std::move(done));
  }

  void emit(Value v) {
    if (stack_.empty()) {
      root = std::move(v);
      return;
    }
    Frame& top = stack_.back();
    if (top.value.is_list()) {
      std::get<ValueList>(top.value.data).push_back(std::move(v));
      return;
    }
    auto& map = std::get<ValueMap>(top.value.data);
    if (!top.expecting_value) {
      std::string key;
      if (auto s = std::get_if<std::string>(&v.data)) key = *s;
      else if (auto i = std::get_if<std::int64_t>(&v.data)) key = std::to_string(*i);
      else if (auto b = std::get_if<bool>(&v.data)) key = *b ? "true" : "false";
      else throw Error(Errc::SyntaxError, "mapping keys must be scalars", v.line, v.column);
      if (find(map, key)) throw Error(Errc::SyntaxError, "duplicate key '" + key + "'", v.line, v.column);
      top.pending_key = std::move(key);
      top.expecting_value = true;
    } else {
      map.push_back({std::move(*top.pending_key), std::move(v)});
      top.pending_key.reset();
      top.expecting_value = false;
    }
  }

  std::vector<Frame> stack_;
};

}  // namespace detail

/// Parses a YAML-compatible subset (mappings, sequences, scalars; no anchors
/// or tags) into a Value tree. An empty document yields null.
inline Value parse_yaml(std::string_view text) {
  std::istringstream in{std::string(text)};
  detail::ValueBuilder builder;
  try {
    YAML::Parser parser(in);
    if (!parser.HandleNextDocument(builder)) return Value{};
    detail::ValueBuilder extra;
    if (parser.HandleNextDocument(extra)) throw Error(Errc::SyntaxError, "multiple documents are not supported", 1);
  } catch (const YAML::Exception& e) {
    throw Error(Errc::SyntaxError, e.msg, e.mark.line + 1, e.mark.column + 1);
  }
  return builder.root.value_or(Value{});
}

// ---------------------------------------------------------------------------
// Document structure
// ---------------------------------------------------------------------------

namespace detail {

[[noreturn]] inline void syntax(const Value& at, const std::string& msg) {
  throw Error(Errc::SyntaxError, msg, at.line, at.column);
}

inline CommandKind parse_kind(const Value& v) {
  if (!v.is_string()) syntax(v, "command kind must be text");
  const auto& s = std::get<std::string>(v.data);
  if (s == "entity") return CommandKind::entity;
  if (s == "component") return CommandKind::component;
  if (s == "processor") return CommandKind::processor;
  if (s == "function") return CommandKind::function;
  throw Error(Errc::UnknownCommandKind, "unknown command kind '" + s + "'", v.line, v.column);
}

}  // namespace detail

inline ConfigDocument parse_config(std::string_view text, std::filesystem::path source = {}) {
  using detail::syntax;
  ConfigDocument doc;
  doc.source = std::move(source);
  const Value root = parse_yaml(text);
  if (root.is_null()) return doc;
  if (!root.is_map()) syntax(root, "top level must be a mapping");

  for (const auto& [section, body] : root.map()) {
    if (section == "commands") {
      if (body.is_null()) continue;
      if (!body.is_map()) syntax(body, "'commands' must be a mapping");
      for (const auto& [name, spec] : body.map()) {
        if (!spec.is_map()) syntax(spec, "command '" + name + "' must be a mapping with 'kind'");
        CommandBinding binding;
        const Value* kind = find(spec.map(), "kind");
        if (!kind) syntax(spec, "command '" + name + "' has no 'kind'");
        binding.kind = detail::parse_kind(*kind);
        for (const auto& [key, v] : spec.map()) {
          if (key == "kind") continue;
          if (key != "module") syntax(v, "unexpected key '" + key + "' in command '" + name + "'");
          if (!v.is_string()) syntax(v, "module path must be text");
          binding.module = std::get<std::string>(v.data);
        }
        if (binding.kind != CommandKind::entity && binding.module.empty())
          syntax(spec, "command '" + name + "' needs a 'module'");
        doc.commands[name] = binding;
      }
    } else if (section == "configurations") {
      if (body.is_null()) continue;
      if (!body.is_list()) syntax(body, "'configurations' must be a list");
      for (const auto& item : body.list()) {
        ImportRef ref;
        if (item.is_string()) {
          ref.path = std::get<std::string>(item.data);
        } else if (item.is_map()) {
          for (const auto& [key, v] : item.map()) {
            if (!v.is_string() && !v.is_null()) syntax(v, "'" + key + "' must be text");
            std::string s = v.is_null() ? std::string() : std::get<std::string>(v.data);
            if (key == "path") ref.path = s;
            else if (key == "prefix") ref.prefix = s;
            else syntax(v, "unexpected key '" + key + "' in configuration reference");
          }
        } else {
          syntax(item, "configuration reference must be a path or {path, prefix}");
        }
        if (ref.path.empty()) syntax(item, "configuration reference without a path");
        doc.configurations.push_back(std::move(ref));
      }
    } else if (section == "description") {
      if (body.is_null()) continue;
      if (!body.is_list()) syntax(body, "'description' must be a list");
      for (const auto& item : body.list()) {
        if (!item.is_map() || item.map().size() != 1) syntax(item, "description entries must be single-key mappings");
        const auto& [command, args] = item.map().front();
        CommandInvocation inv;
        inv.command = command;
        inv.base_dir = doc.base_dir();
        inv.line = item.line;
        if (!args.is_null()) {
          if (!args.is_map()) syntax(args, "arguments of '" + command + "' must be a mapping");
          for (const auto& entry : args.map()) {
            if (entry.key == "entity") {
              if (!entry.value.is_string()) syntax(entry.value, "'entity' must be text");
              inv.entity = std::get<std::string>(entry.value.data);
            } else {
              inv.attributes.push_back(entry);
            }
          }
        }
        doc.description.push_back(std::move(inv));
      }
    } else {
      throw Error(Errc::UnknownSection, "unknown top-level key '" + section + "'", root.line, 0);
    }
  }
  return doc;
}

/// Checks that every invocation names a declared command and uses it in a
/// position its kind allows.
inline void validate(const ConfigDocument& doc) {
  for (const auto& inv : doc.description) {
    auto it = doc.commands.find(inv.command);
    if (it == doc.commands.end())
      throw Error(Errc::UnknownCommand, "command '" + inv.command + "' is not declared", inv.line);
    switch (it->second.kind) {
      case CommandKind::entity:
        if (!inv.attributes.empty())
          throw Error(Errc::InvalidInvocation, "entity command '" + inv.command + "' takes no attributes", inv.line);
        break;
      case CommandKind::component:
        if (!inv.entity)
          throw Error(Errc::InvalidInvocation, "component command '" + inv.command + "' needs an 'entity'", inv.line);
        break;
      case CommandKind::processor:
        break;
      case CommandKind::function:
        throw Error(Errc::InvalidInvocation,
                    "function command '" + inv.command + "' can only be used inside attribute values", inv.line);
    }
  }
}

// ---------------------------------------------------------------------------
// Imports
// ---------------------------------------------------------------------------

using ConfigLoader = std::function<std::optional<std::string>(const std::filesystem::path&)>;

inline std::optional<std::string> read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return std::nullopt;
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

namespace detail {

inline std::string qualify(const std::string& prefix, const std::string& name) {
  return prefix.empty() ? name : prefix + "/" + name;
}

inline std::filesystem::path import_key(const std::filesystem::path& p) { return p.lexically_normal(); }

inline void flatten_into(const ConfigDocument& doc, const std::string& prefix, const ConfigLoader& loader,
                         std::vector<std::filesystem::path>& stack, ConfigDocument& out) {
  for (const auto& ref : doc.configurations) {
    std::filesystem::path path = import_key(doc.base_dir() / ref.path);
    if (std::find(stack.begin(), stack.end(), path) != stack.end())
      fail(Errc::ImportCycle, "configuration '" + path.string() + "' imports itself");
    auto text = loader(path);
    if (!text) fail(Errc::MissingImport, "cannot load configuration '" + path.string() + "'");
    ConfigDocument child = parse_config(*text, path);
    stack.push_back(path);
    flatten_into(child, qualify(prefix, ref.prefix), loader, stack, out);
    stack.pop_back();
  }
  for (const auto& [name, binding] : doc.commands) {
    auto [it, inserted] = out.commands.emplace(name, binding);
    if (!inserted && !(it->second == binding))
      fail(Errc::NameCollision, "command '" + name + "' is declared with different bindings");
  }
  for (auto inv : doc.description) {
    if (inv.entity) inv.entity = qualify(prefix, *inv.entity);
    out.description.push_back(std::move(inv));
  }
}

}  // namespace detail

/// Inlines every imported configuration. Imported invocations come first,
/// and their entity names gain the import prefix plus "/".
inline ConfigDocument resolve_imports(const ConfigDocument& doc, const ConfigLoader& loader = read_text_file) {
  ConfigDocument out;
  out.source = doc.source;
  std::vector<std::filesystem::path> stack;
  if (!doc.source.empty()) stack.push_back(detail::import_key(doc.source));
  detail::flatten_into(doc, "", loader, stack, out);

  std::map<std::string, int> names;
  for (const auto& inv : out.description) {
    auto it = out.commands.find(inv.command);
    if (it == out.commands.end() || it->second.kind != CommandKind::entity || !inv.entity) continue;
    if (!names.emplace(*inv.entity, inv.line).second)
      throw Error(Errc::NameCollision, "entity '" + *inv.entity + "' is defined twice", inv.line);
  }
  return out;
}

/// Reads, flattens and validates a configuration file.
inline ConfigDocument load_config(const std::filesystem::path& path, const ConfigLoader& loader = read_text_file) {
  auto text = loader(path);
  if (!text) fail(Errc::Io, "cannot read configuration '" + path.string() + "'");
  ConfigDocument doc = resolve_imports(parse_config(*text, path), loader);
  validate(doc);
  return doc;
}

}  // namespace gemini
