#pragma once

// Natural language surface forms for tasks. Goal texts are drawn from a
// fixed template pool per task type; step outlines are derived from the task
// structure alone so paired episodes share them verbatim. Both are meant as
// annotation stubs that a human pass (or an external rewriter) can refine.

#include <string>
#include <vector>

#include "affordsim/rng.hpp"
#include "affordsim/task_types.hpp"

namespace affordsim::genbench {

// "CounterTop" -> "countertop", "SoapBar" -> "soap bar", "Mug" -> "mug"
std::string surface_name(const std::string& class_name);

// "a mug", "an egg"
std::string with_article(const std::string& noun);

std::string pluralize(const std::string& noun);

int instruction_variant_count(TaskType t);

// Rendered goal text for one template variant; variant is taken modulo the
// pool size so callers can iterate freely.
std::string instruction_text(const TaskSpec& task, int variant);

// Task-shaped step skeleton (find X, wash X, ...), not tied to any plan.
std::vector<std::string> step_outline(const TaskSpec& task);

// `count` annotations with distinct goal phrasings, deterministic in `rng`.
std::vector<Annotation> make_annotations(const TaskSpec& task, Rng& rng,
                                         int count = 3);

}  // namespace affordsim::genbench
