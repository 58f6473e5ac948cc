#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace scopeprobe {

enum class Language { EN, ZH };
enum class Structure { UE, EU };
enum class Condition { SS, IS };
enum class HumanGroup { L1_EN, L1_ZH, L2_EN, L2_ZH };

std::string to_string(Language v);
std::string to_string(Structure v);
std::string to_string(Condition v);
std::string to_string(HumanGroup v);

Language language_from_string(const std::string& s);
Structure structure_from_string(const std::string& s);
Condition condition_from_string(const std::string& s);
HumanGroup group_from_string(const std::string& s);

// Materials each human group was tested on (groups never cross languages).
Language group_material_language(HumanGroup g);

// One truth-value-judgment item: a doubly quantified target sentence plus
// a story context favoring each reading.
struct StimulusItem {
  std::string id;
  Language language = Language::EN;
  Structure structure = Structure::UE;
  std::string target;
  std::string context_ss;
  std::string context_is;
  std::optional<std::string> pair_id;  // links a UE item to its EU twin

  const std::string& context(Condition c) const {
    return c == Condition::SS ? context_ss : context_is;
  }
};

// One participant rating of one (item, condition) on a 7-point scale.
struct HumanJudgment {
  HumanGroup group = HumanGroup::L1_EN;
  std::string participant_id;
  std::string item_id;
  Structure structure = Structure::UE;
  Condition condition = Condition::SS;
  int rating = 0;
};

struct DatasetManifest {
  std::string name;
  std::string language;  // "en", "zh", or "mixed"
  // keyed "EN-UE", "EN-EU", "ZH-UE", "ZH-EU"
  std::map<std::string, int> item_count_by_structure;
  std::string source;
};

// Loads a line-delimited JSON stimulus file. Every text field is NFC
// normalized and checked non-empty after trimming; ids must be unique;
// the two contexts must differ. Unless `allow_mixed` is set, all records
// must carry the same language tag.
std::vector<StimulusItem> load_stimuli(const std::filesystem::path& path,
                                       bool allow_mixed = false);

// Loads the human judgment CSV (header: group,participant_id,item_id,
// structure,condition,rating). Ratings outside [1,7], unknown tags, and
// duplicate (group, participant, item, condition) keys are errors.
std::vector<HumanJudgment> load_judgments(const std::filesystem::path& path);

// Checks all StimulusItem invariants plus pair_id resolution and returns
// the manifest. Throws ValidationError otherwise.
DatasetManifest validate_dataset(const std::vector<StimulusItem>& items,
                                 const std::string& name = "dataset",
                                 const std::string& source = "");

// Canonical serialization: one JSON object per line, fixed key order,
// UTF-8 with raw (unescaped) non-ASCII. load + serialize is a fixed point.
std::string serialize_stimuli(const std::vector<StimulusItem>& items);

std::string manifest_to_json(const DatasetManifest& m);

}  // namespace scopeprobe
