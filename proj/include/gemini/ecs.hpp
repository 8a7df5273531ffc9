#pragma once

#include <concepts>
#include <algorithm>
#include <compare>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <typeindex>
#include <unordered_map>
#include <utility>
#include <vector>

#include "gemini/attribute.hpp"
#include "gemini/error.hpp"
#include "gemini/value.hpp"

namespace gemini {

struct EntityId {
  std::uint64_t value = 0;
  auto operator<=>(const EntityId&) const = default;
};

inline std::string to_string(EntityId id) { return std::to_string(id.value); }

/// Pure data attached to an entity. Attributes are reflected by name in a
/// fixed order so the state log can hash them and configs can set them.
class Component {
 public:
  virtual ~Component() = default;

  virtual std::string_view type_name() const = 0;
  virtual std::vector<Attribute> attributes() const = 0;

  /// Sets one attribute from a configuration value.
  virtual void assign(std::string_view name, const Value& value) = 0;

  /// Checks the component's invariants after construction from config.
  virtual void validate() const {}

  bool has_attribute(std::string_view name) const {
    for (const auto& a : attributes())
      if (a.name == name) return true;
    return false;
  }

 protected:
  [[noreturn]] void unknown_attribute(std::string_view name) const {
    fail(Errc::UnknownAttribute,
         "component " + std::string(type_name()) + " has no attribute '" + std::string(name) + "'");
  }
};

class World;

class Processor {
 public:
  virtual ~Processor() = default;

  virtual std::string_view name() const = 0;
  virtual void step(World& world) = 0;

  /// Component type names this processor reads and writes; used for the
  /// pipeline graph.
  virtual std::vector<std::string> reads() const { return {}; }
  virtual std::vector<std::string> writes() const { return {}; }

  /// Restricts the processor to a single entity when set.
  void set_target(std::optional<EntityId> target) { target_ = target; }
  std::optional<EntityId> target() const { return target_; }
  bool applies_to(EntityId id) const { return !target_ || *target_ == id; }

 private:
  std::optional<EntityId> target_;
};

using Observer = std::function<void(const World&, std::uint64_t iteration)>;

class World {
 public:
  World() = default;
  World(World&&) = default;
  World& operator=(World&&) = default;

  EntityId create_entity(std::optional<std::string> name = std::nullopt) {
    guard_identity("create_entity");
    if (name) {
      if (by_name_.count(*name)) fail(Errc::DuplicateName, "entity name '" + *name + "' already in use");
    }
    EntityId id{next_id_++};
    entities_.push_back(id);
    components_of_[id.value];
    if (name) {
      by_name_.emplace(*name, id);
      names_.emplace(id.value, *name);
    }
    return id;
  }

  template <typename C>
    requires std::derived_from<C, Component>
  C& attach(EntityId entity, C component) {
    return static_cast<C&>(attach(entity, std::unique_ptr<Component>(std::make_unique<C>(std::move(component)))));
  }

  Component& attach(EntityId entity, std::unique_ptr<Component> component) {
    guard_identity("attach_component");
    require_entity(entity);
    const Component& ref = *component;
    std::type_index type = typeid(ref);
    auto& store = stores_[type];
    if (store.count(entity.value)) {
      fail(Errc::DuplicateComponent,
           "entity " + to_string(entity) + " already holds " + std::string(component->type_name()));
    }
    Component& stored = *component;
    store.emplace(entity.value, std::move(component));
    components_of_[entity.value].push_back(type);
    return stored;
  }

  template <typename C>
  C* find(EntityId entity) {
    return const_cast<C*>(std::as_const(*this).find<C>(entity));
  }

  template <typename C>
  const C* find(EntityId entity) const {
    require_entity(entity);
    auto s = stores_.find(typeid(C));
    if (s == stores_.end()) return nullptr;
    auto it = s->second.find(entity.value);
    return it == s->second.end() ? nullptr : static_cast<const C*>(it->second.get());
  }

  template <typename C>
  C& get(EntityId entity) {
    return const_cast<C&>(std::as_const(*this).get<C>(entity));
  }

  template <typename C>
  const C& get(EntityId entity) const {
    if (const C* c = find<C>(entity)) return *c;
    fail(Errc::MissingComponent, "entity " + to_string(entity) + " has no " + std::string(C{}.type_name()));
  }

  template <typename C>
  bool has(EntityId entity) const {
    return find<C>(entity) != nullptr;
  }

  bool has(EntityId entity, std::type_index type) const {
    auto s = stores_.find(type);
    return s != stores_.end() && s->second.count(entity.value);
  }

  /// Entities holding every listed type, ascending id.
  std::vector<EntityId> query(std::span<const std::type_index> required) const {
    std::vector<EntityId> out;
    for (EntityId e : entities_) {
      bool all = std::all_of(required.begin(), required.end(), [&](auto t) { return has(e, t); });
      if (all) out.push_back(e);
    }
    return out;
  }

  template <typename... Cs>
  std::vector<EntityId> query() const {
    const std::type_index types[] = {typeid(World), typeid(Cs)...};
    return query(std::span<const std::type_index>(types + 1, sizeof...(Cs)));
  }

  const std::vector<EntityId>& entities() const { return entities_; }
  bool contains(EntityId entity) const { return entity.value >= 1 && entity.value < next_id_; }

  std::optional<EntityId> find_entity(std::string_view name) const {
    auto it = by_name_.find(std::string(name));
    if (it == by_name_.end()) return std::nullopt;
    return it->second;
  }

  std::optional<std::string> name_of(EntityId entity) const {
    auto it = names_.find(entity.value);
    if (it == names_.end()) return std::nullopt;
    return it->second;
  }

  /// Components held by an entity, ordered by type name.
  std::vector<const Component*> components(EntityId entity) const {
    require_entity(entity);
    std::vector<const Component*> out;
    for (const auto& type : components_of_.at(entity.value))
      out.push_back(stores_.at(type).at(entity.value).get());
    std::sort(out.begin(), out.end(), [](auto a, auto b) { return a->type_name() < b->type_name(); });
    return out;
  }

  std::vector<const Component*> components_of_type(std::string_view type_name) const {
    std::vector<const Component*> out;
    for (EntityId e : entities_)
      for (const Component* c : components(e))
        if (c->type_name() == type_name) out.push_back(c);
    return out;
  }

  Processor& register_processor(std::unique_ptr<Processor> processor) {
    pipeline_.push_back(std::move(processor));
    return *pipeline_.back();
  }

  const std::vector<std::unique_ptr<Processor>>& pipeline() const { return pipeline_; }

  /// The iteration that the next step() will execute; starts at 1.
  std::uint64_t iteration() const { return iteration_; }

  void step(std::span<const Observer> observers = {}) {
    {
      StepScope scope(*this);
      for (auto& p : pipeline_) p->step(*this);
    }
    for (const auto& obs : observers) obs(*this, iteration_);
    ++iteration_;
  }

  void run(std::uint64_t iterations, std::span<const Observer> observers = {}) {
    for (std::uint64_t i = 0; i < iterations; ++i) step(observers);
  }

 private:
  struct StepScope {
    explicit StepScope(World& w) : world(w) { world.stepping_ = true; }
    ~StepScope() { world.stepping_ = false; }
    World& world;
  };

  void guard_identity(std::string_view op) const {
    if (stepping_) fail(Errc::IdentityMutation, std::string(op) + " is not allowed while processors run");
  }

  void require_entity(EntityId entity) const {
    if (!contains(entity)) fail(Errc::UnknownEntity, "no entity with id " + to_string(entity));
  }

  std::uint64_t next_id_ = 1;
  std::uint64_t iteration_ = 1;
  bool stepping_ = false;
  std::vector<EntityId> entities_;
  std::unordered_map<std::string, EntityId> by_name_;
  std::unordered_map<std::uint64_t, std::string> names_;
  std::unordered_map<std::type_index, std::unordered_map<std::uint64_t, std::unique_ptr<Component>>> stores_;
  std::unordered_map<std::uint64_t, std::vector<std::type_index>> components_of_;
  std::vector<std::unique_ptr<Processor>> pipeline_;
};

}  // namespace gemini
