#include "scopeprobe/stimuli.hpp"

#include <nlohmann/json.hpp>

#include <fstream>
#include <set>
#include <sstream>
#include <unordered_map>

#include "scopeprobe/errors.hpp"
#include "scopeprobe/text.hpp"

namespace scopeprobe {

using nlohmann::json;
using nlohmann::ordered_json;

std::string to_string(Language v) { return v == Language::EN ? "en" : "zh"; }
std::string to_string(Structure v) { return v == Structure::UE ? "UE" : "EU"; }
std::string to_string(Condition v) { return v == Condition::SS ? "SS" : "IS"; }

std::string to_string(HumanGroup v) {
  switch (v) {
    case HumanGroup::L1_EN: return "L1_EN";
    case HumanGroup::L1_ZH: return "L1_ZH";
    case HumanGroup::L2_EN: return "L2_EN";
    case HumanGroup::L2_ZH: return "L2_ZH";
  }
  return "L1_EN";
}

Language language_from_string(const std::string& s) {
  if (s == "en") return Language::EN;
  if (s == "zh") return Language::ZH;
  throw ParseError("unknown language tag: \"" + s + "\" (legal: en, zh)");
}

Structure structure_from_string(const std::string& s) {
  if (s == "UE") return Structure::UE;
  if (s == "EU") return Structure::EU;
  throw ParseError("unknown structure tag: \"" + s + "\" (legal: UE, EU)");
}

Condition condition_from_string(const std::string& s) {
  if (s == "SS") return Condition::SS;
  if (s == "IS") return Condition::IS;
  throw ParseError("unknown condition tag: \"" + s + "\" (legal: SS, IS)");
}

HumanGroup group_from_string(const std::string& s) {
  if (s == "L1_EN") return HumanGroup::L1_EN;
  if (s == "L1_ZH") return HumanGroup::L1_ZH;
  if (s == "L2_EN") return HumanGroup::L2_EN;
  if (s == "L2_ZH") return HumanGroup::L2_ZH;
  throw ParseError("unknown group tag: \"" + s +
                   "\" (legal: L1_EN, L1_ZH, L2_EN, L2_ZH)");
}

Language group_material_language(HumanGroup g) {
  switch (g) {
    case HumanGroup::L1_EN:
    case HumanGroup::L2_EN: return Language::EN;
    case HumanGroup::L1_ZH:
    case HumanGroup::L2_ZH: return Language::ZH;
  }
  return Language::EN;
}

namespace {

std::string cell_key(Language lang, Structure st) {
  std::string key = lang == Language::EN ? "EN" : "ZH";
  key += '-';
  key += to_string(st);
  return key;
}

std::string require_text_field(const json& rec, const char* field,
                               std::size_t line_no) {
  if (!rec.contains(field)) {
    throw ParseError("missing field: " + std::string(field) + ", line " +
                     std::to_string(line_no));
  }
  if (!rec.at(field).is_string()) {
    throw ParseError("field not a string: " + std::string(field) + ", line " +
                     std::to_string(line_no));
  }
  std::string value = to_nfc(rec.at(field).get<std::string>());
  if (trim(value).empty()) {
    throw ParseError("empty field: " + std::string(field) + ", line " +
                     std::to_string(line_no));
  }
  return value;
}

// Simple CSV line splitter; handles double-quoted fields with "" escapes.
std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          cur += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        cur += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur += c;
    }
  }
  fields.push_back(cur);
  return fields;
}

}  // namespace

std::vector<StimulusItem> load_stimuli(const std::filesystem::path& path,
                                       bool allow_mixed) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open stimulus file: " + path.string());

  std::vector<StimulusItem> items;
  std::unordered_map<std::string, std::size_t> seen_ids;  // id -> line
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    json rec;
    try {
      rec = json::parse(line);
    } catch (const json::exception& e) {
      throw ParseError("malformed line " + std::to_string(line_no) + ": " +
                       e.what());
    }
    if (!rec.is_object()) {
      throw ParseError("malformed line " + std::to_string(line_no) +
                       ": expected a JSON object");
    }
    static const std::set<std::string> known_keys = {
        "id", "language", "structure", "target",
        "context_ss", "context_is", "pair_id"};
    for (const auto& [key, value] : rec.items()) {
      if (!known_keys.count(key)) {
        throw ParseError("unknown field: " + key + ", line " +
                         std::to_string(line_no));
      }
    }

    StimulusItem item;
    item.id = require_text_field(rec, "id", line_no);
    item.language = language_from_string(require_text_field(rec, "language", line_no));
    item.structure = structure_from_string(require_text_field(rec, "structure", line_no));
    item.target = require_text_field(rec, "target", line_no);
    item.context_ss = require_text_field(rec, "context_ss", line_no);
    item.context_is = require_text_field(rec, "context_is", line_no);
    if (rec.contains("pair_id") && !rec.at("pair_id").is_null()) {
      item.pair_id = require_text_field(rec, "pair_id", line_no);
    }

    if (item.context_ss == item.context_is) {
      throw ValidationError("context_ss equals context_is for item \"" +
                            item.id + "\", line " + std::to_string(line_no));
    }
    if (auto it = seen_ids.find(item.id); it != seen_ids.end()) {
      throw ValidationError("duplicate id: \"" + item.id + "\", lines " +
                            std::to_string(it->second) + " and " +
                            std::to_string(line_no));
    }
    seen_ids.emplace(item.id, line_no);
    items.push_back(std::move(item));
  }

  if (!allow_mixed && !items.empty()) {
    const Language first = items.front().language;
    for (std::size_t k = 1; k < items.size(); ++k) {
      if (items[k].language != first) {
        throw ValidationError(
            "mixed languages in a single-language dataset file: item \"" +
            items[k].id + "\" is " + to_string(items[k].language) +
            ", file started with " + to_string(first));
      }
    }
  }
  return items;
}

std::vector<HumanJudgment> load_judgments(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open judgment file: " + path.string());

  std::string line;
  if (!std::getline(in, line)) throw ParseError("empty judgment file: " + path.string());
  const auto header = split_csv_line(trim(line));
  const std::vector<std::string> expected = {
      "group", "participant_id", "item_id", "structure", "condition", "rating"};
  if (header != expected) {
    throw ParseError(
        "judgment file header must be "
        "group,participant_id,item_id,structure,condition,rating");
  }

  std::vector<HumanJudgment> out;
  std::set<std::tuple<std::string, std::string, std::string, std::string>> keys;
  std::size_t row_no = 1;
  while (std::getline(in, line)) {
    ++row_no;
    if (trim(line).empty()) continue;
    const auto fields = split_csv_line(line);
    if (fields.size() != 6) {
      throw ParseError("expected 6 fields, got " +
                       std::to_string(fields.size()) + ", row " +
                       std::to_string(row_no));
    }
    HumanJudgment j;
    try {
      j.group = group_from_string(trim(fields[0]));
      j.structure = structure_from_string(trim(fields[3]));
      j.condition = condition_from_string(trim(fields[4]));
    } catch (const ParseError& e) {
      throw ParseError(std::string(e.what()) + ", row " + std::to_string(row_no));
    }
    j.participant_id = trim(fields[1]);
    j.item_id = to_nfc(trim(fields[2]));
    if (j.participant_id.empty() || j.item_id.empty()) {
      throw ParseError("empty participant_id or item_id, row " +
                       std::to_string(row_no));
    }
    const std::string rating_text = trim(fields[5]);
    try {
      std::size_t pos = 0;
      j.rating = std::stoi(rating_text, &pos);
      if (pos != rating_text.size()) throw std::invalid_argument(rating_text);
    } catch (const std::exception&) {
      throw ParseError("rating not an integer: \"" + rating_text + "\", row " +
                       std::to_string(row_no));
    }
    if (j.rating < 1 || j.rating > 7) {
      throw ValidationError("rating out of range [1,7]: " +
                            std::to_string(j.rating) + ", row " +
                            std::to_string(row_no));
    }
    auto key = std::make_tuple(to_string(j.group), j.participant_id, j.item_id,
                               to_string(j.condition));
    if (!keys.insert(key).second) {
      throw ValidationError("duplicate judgment key (" + to_string(j.group) +
                            ", " + j.participant_id + ", " + j.item_id + ", " +
                            to_string(j.condition) + "), row " +
                            std::to_string(row_no));
    }
    out.push_back(std::move(j));
  }
  return out;
}

DatasetManifest validate_dataset(const std::vector<StimulusItem>& items,
                                 const std::string& name,
                                 const std::string& source) {
  if (items.empty()) throw ValidationError("empty dataset");

  std::set<std::string> ids;
  for (const auto& item : items) {
    if (trim(item.target).empty() || trim(item.context_ss).empty() ||
        trim(item.context_is).empty() || trim(item.id).empty()) {
      throw ValidationError("empty field in item \"" + item.id + "\"");
    }
    if (item.context_ss == item.context_is) {
      throw ValidationError("context_ss equals context_is for item \"" +
                            item.id + "\"");
    }
    if (!ids.insert(item.id).second) {
      throw ValidationError("duplicate id: \"" + item.id + "\"");
    }
  }
  for (const auto& item : items) {
    if (item.pair_id && !ids.count(*item.pair_id)) {
      throw ValidationError("dangling pair_id: " + *item.pair_id);
    }
  }

  DatasetManifest m;
  m.name = name;
  m.source = source;
  std::set<Language> langs;
  for (const auto& item : items) {
    langs.insert(item.language);
    m.item_count_by_structure[cell_key(item.language, item.structure)]++;
  }
  m.language = langs.size() > 1 ? "mixed" : to_string(*langs.begin());
  return m;
}

std::string serialize_stimuli(const std::vector<StimulusItem>& items) {
  std::string out;
  for (const auto& item : items) {
    ordered_json rec;
    rec["id"] = item.id;
    rec["language"] = to_string(item.language);
    rec["structure"] = to_string(item.structure);
    rec["target"] = item.target;
    rec["context_ss"] = item.context_ss;
    rec["context_is"] = item.context_is;
    if (item.pair_id) rec["pair_id"] = *item.pair_id;
    out += rec.dump(-1, ' ', false, json::error_handler_t::strict);
    out += '\n';
  }
  return out;
}

std::string manifest_to_json(const DatasetManifest& m) {
  ordered_json doc;
  doc["name"] = m.name;
  doc["language"] = m.language;
  doc["item_count_by_structure"] = m.item_count_by_structure;
  doc["source"] = m.source;
  return doc.dump(2);
}

}  // namespace scopeprobe
