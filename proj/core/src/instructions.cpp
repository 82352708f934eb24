#include "affordsim/instructions.hpp"

#include <algorithm>
#include <cctype>
#include <map>
#include <numeric>

namespace affordsim::genbench {

namespace {

// Irregular surface forms; everything else splits on camel case.
const std::map<std::string, std::string>& overrides() {
  static const std::map<std::string, std::string> table = {
      {"CounterTop", "countertop"},
      {"SinkBasin", "sink basin"},
  };
  return table;
}

bool vowel(char c) {
  switch (std::tolower(static_cast<unsigned char>(c))) {
    case 'a': case 'e': case 'i': case 'o': case 'u': return true;
    default: return false;
  }
}

std::string replace_all(std::string text, const std::string& key,
                        const std::string& value) {
  std::size_t pos = 0;
  while ((pos = text.find(key, pos)) != std::string::npos) {
    text.replace(pos, key.size(), value);
    pos += value.size();
  }
  return text;
}

std::string capitalize(std::string s) {
  if (!s.empty()) s[0] = std::toupper(static_cast<unsigned char>(s[0]));
  return s;
}

// Template placeholders: {obj} {a_obj} {objs} {recep} {mrecep} {a_mrecep}
// {prep} (in for openables, on for plain surfaces).
const std::vector<std::string>& templates(TaskType t) {
  static const std::map<TaskType, std::vector<std::string>> pool = {
      {TaskType::PickAndPlace,
       {
           "Put {a_obj} {prep} the {recep}.",
           "Place {a_obj} {prep} the {recep}.",
           "Move {a_obj} to the {recep}.",
           "Pick up {a_obj} and put it {prep} the {recep}.",
           "Grab {a_obj} and place it {prep} the {recep}.",
           "Carry {a_obj} over to the {recep}.",
       }},
      {TaskType::CleanAndPlace,
       {
           "Put a clean {obj} {prep} the {recep}.",
           "Wash {a_obj} and put it {prep} the {recep}.",
           "Clean {a_obj} and place it {prep} the {recep}.",
           "Rinse {a_obj}, then put it {prep} the {recep}.",
           "Place a washed {obj} {prep} the {recep}.",
           "Clean {a_obj} in the sink and move it to the {recep}.",
       }},
      {TaskType::HeatAndPlace,
       {
           "Microwave {a_obj} and place it {prep} the {recep}.",
           "Heat {a_obj} and put it {prep} the {recep}.",
           "Put a heated {obj} {prep} the {recep}.",
           "Warm up {a_obj} and place it {prep} the {recep}.",
           "Heat {a_obj} in the microwave, then put it {prep} the {recep}.",
           "Place a hot {obj} {prep} the {recep}.",
       }},
      {TaskType::CoolAndPlace,
       {
           "Chill {a_obj} and place it {prep} the {recep}.",
           "Cool {a_obj} and put it {prep} the {recep}.",
           "Put a chilled {obj} {prep} the {recep}.",
           "Cool {a_obj} in the fridge, then put it {prep} the {recep}.",
           "Place a cold {obj} {prep} the {recep}.",
           "Put {a_obj} in the fridge to chill, then move it to the {recep}.",
       }},
      {TaskType::PickTwoAndPlace,
       {
           "Put two {objs} {prep} the {recep}.",
           "Place two {objs} {prep} the {recep}.",
           "Put a pair of {objs} {prep} the {recep}.",
           "Find two {objs} and put them {prep} the {recep}.",
           "Gather two {objs} and set them {prep} the {recep}.",
           "Move two {objs} to the {recep}.",
       }},
      {TaskType::StackAndPlace,
       {
           "Put {a_obj} in a clean {mrecep} and place it {prep} the {recep}.",
           "Place {a_obj} in a {mrecep}, then put the {mrecep} {prep} the {recep}.",
           "Put {a_obj} {prep} the {recep} in a clean {mrecep}.",
           "Stack {a_obj} in a {mrecep} and move the {mrecep} to the {recep}.",
           "Set {a_obj} inside a clean {mrecep} on the {recep}.",
           "Place {a_obj} into a {mrecep} and leave it {prep} the {recep}.",
       }},
  };
  return pool.at(t);
}

}  // namespace

std::string surface_name(const std::string& class_name) {
  auto it = overrides().find(class_name);
  if (it != overrides().end()) return it->second;
  std::string out;
  for (char c : class_name) {
    if (std::isupper(static_cast<unsigned char>(c)) && !out.empty()) out += ' ';
    out += std::tolower(static_cast<unsigned char>(c));
  }
  return out;
}

std::string with_article(const std::string& noun) {
  if (noun.empty()) return noun;
  return (vowel(noun[0]) ? "an " : "a ") + noun;
}

std::string pluralize(const std::string& noun) {
  if (noun.empty()) return noun;
  char last = noun.back();
  if (last == 's' || last == 'x' || last == 'o') return noun + "es";
  if (noun.size() >= 2) {
    std::string tail = noun.substr(noun.size() - 2);
    if (tail == "ch" || tail == "sh") return noun + "es";
  }
  return noun + "s";
}

int instruction_variant_count(TaskType t) {
  return static_cast<int>(templates(t).size());
}

std::string instruction_text(const TaskSpec& task, int variant) {
  const auto& pool = templates(task.type);
  std::string text = pool[static_cast<std::size_t>(variant) % pool.size()];

  std::string obj = surface_name(task.target_class);
  std::string recep = surface_name(task.receptacle_class);
  std::string prep =
      world::class_info(task.receptacle_class).openable ? "in" : "on";
  text = replace_all(text, "{a_obj}", with_article(obj));
  text = replace_all(text, "{objs}", pluralize(obj));
  text = replace_all(text, "{obj}", obj);
  text = replace_all(text, "{recep}", recep);
  text = replace_all(text, "{prep}", prep);
  if (!task.mrecep_class.empty()) {
    std::string mrecep = surface_name(task.mrecep_class);
    text = replace_all(text, "{a_mrecep}", with_article(mrecep));
    text = replace_all(text, "{mrecep}", mrecep);
  }
  return capitalize(text);
}

std::vector<std::string> step_outline(const TaskSpec& task) {
  std::string obj = surface_name(task.target_class);
  std::string recep = surface_name(task.receptacle_class);
  std::string prep =
      world::class_info(task.receptacle_class).openable ? "in" : "on";
  std::string place = "Put the " + obj + " " + prep + " the " + recep + ".";

  switch (task.type) {
    case TaskType::PickAndPlace:
      return {"Find the " + obj + ".", "Pick up the " + obj + ".",
              "Go to the " + recep + ".", place};
    case TaskType::CleanAndPlace:
      return {"Find the " + obj + ".", "Pick up the " + obj + ".",
              "Carry the " + obj + " to the sink.", "Wash the " + obj + ".",
              "Go to the " + recep + ".", place};
    case TaskType::HeatAndPlace:
      return {"Find the " + obj + ".", "Pick up the " + obj + ".",
              "Take the " + obj + " to the microwave.",
              "Heat the " + obj + ".", "Go to the " + recep + ".", place};
    case TaskType::CoolAndPlace:
      return {"Find the " + obj + ".", "Pick up the " + obj + ".",
              "Take the " + obj + " to the fridge.", "Chill the " + obj + ".",
              "Go to the " + recep + ".", place};
    case TaskType::PickTwoAndPlace:
      return {"Find the first " + obj + ".", "Pick it up.",
              "Put it " + prep + " the " + recep + ".",
              "Find the second " + obj + ".", "Pick it up.",
              "Put it " + prep + " the " + recep + "."};
    case TaskType::StackAndPlace: {
      std::string mrecep = surface_name(task.mrecep_class);
      return {"Pick up the " + obj + ".",
              "Put the " + obj + " in the " + mrecep + ".",
              "Pick up the " + mrecep + ".", "Go to the " + recep + ".",
              "Put the " + mrecep + " " + prep + " the " + recep + "."};
    }
  }
  return {place};
}

std::vector<Annotation> make_annotations(const TaskSpec& task, Rng& rng,
                                         int count) {
  std::vector<int> variants(instruction_variant_count(task.type));
  std::iota(variants.begin(), variants.end(), 0);
  rng.shuffle(variants);

  std::vector<Annotation> out;
  auto steps = step_outline(task);
  for (int i = 0; i < count; ++i) {
    Annotation a;
    a.goal_text = instruction_text(task, variants[i % variants.size()]);
    a.step_texts = steps;
    out.push_back(std::move(a));
  }
  return out;
}

}  // namespace affordsim::genbench
