#include "decor/store.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace decor {

InvertedIndex LogStore::build_index() const {
  return InvertedIndex::build(entries);
}

bool LogStore::has_id(const std::string& id) const {
  return std::any_of(entries.begin(), entries.end(),
                     [&](const HistoryEntry& e) { return e.id == id; });
}

namespace {

nlohmann::json records_to_json(const std::vector<ExecutionRecord>& records) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& r : records) {
    arr.push_back(
        {{"model", r.model}, {"score", r.score}, {"cost", r.cost}});
  }
  return arr;
}

std::vector<ExecutionRecord> records_from_json(const nlohmann::json& arr) {
  if (!arr.is_array()) {
    throw MalformedJson("'records' must be an array");
  }
  std::vector<ExecutionRecord> out;
  for (const auto& j : arr) {
    ExecutionRecord r;
    if (!j.contains("model")) throw MissingField("model");
    if (!j.contains("score")) throw MissingField("score");
    if (!j.contains("cost")) throw MissingField("cost");
    r.model = j.at("model").get<std::string>();
    r.score = j.at("score").get<double>();
    r.cost = j.at("cost").get<double>();
    out.push_back(std::move(r));
  }
  return out;
}

}  // namespace

std::string entry_to_jsonl(const LogStore& store, const HistoryEntry& entry) {
  nlohmann::json j{
      {"id", entry.id},
      {"query", entry.query},
      {"profile", entry.profile.to_json()},
      {"records", records_to_json(entry.records)},
  };
  auto it = store.vectors.find(entry.id);
  if (it != store.vectors.end()) {
    j["vector"] = it->second.values;
  }
  return j.dump();
}

LogStore load_store(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open store file: " + path);

  LogStore store;
  store.path = path;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    nlohmann::json j = nlohmann::json::parse(line, nullptr, false);
    if (j.is_discarded()) {
      throw ParseError(line_no, "invalid JSON");
    }
    if (line_no == 1 && j.is_object() && j.contains("embedder_tag") &&
        !j.contains("id")) {
      store.embedder_tag = j.at("embedder_tag").get<std::string>();
      continue;
    }
    HistoryEntry entry;
    try {
      if (!j.contains("id")) throw MissingField("id");
      if (!j.contains("query")) throw MissingField("query");
      if (!j.contains("profile")) throw MissingField("profile");
      if (!j.contains("records")) throw MissingField("records");
      entry.id = j.at("id").get<std::string>();
      entry.query = j.at("query").get<std::string>();
      entry.profile = CapabilityProfile::from_json(j.at("profile"));
      entry.records = records_from_json(j.at("records"));
      entry.validate();
    } catch (const DuplicateId&) {
      throw;
    } catch (const RoutingError& e) {
      throw InvariantViolation(line_no, entry.id.empty() ? "?" : entry.id,
                               e.what());
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(line_no, e.what());
    }
    if (store.has_id(entry.id)) throw DuplicateId(entry.id);
    if (j.contains("vector")) {
      EmbeddingVector vec;
      vec.values = j.at("vector").get<std::vector<double>>();
      store.vectors.emplace(entry.id, std::move(vec));
    }
    store.entries.push_back(std::move(entry));
  }
  std::sort(store.entries.begin(), store.entries.end(),
            [](const HistoryEntry& a, const HistoryEntry& b) {
              return a.id < b.id;
            });
  return store;
}

void save_store(const LogStore& store, const std::string& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot write store file: " + path);
  if (!store.embedder_tag.empty()) {
    out << nlohmann::json{{"embedder_tag", store.embedder_tag}}.dump()
        << '\n';
  }
  for (const auto& entry : store.entries) {
    out << entry_to_jsonl(store, entry) << '\n';
  }
}

std::vector<RawLogRecord> load_raw_records(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open raw log file: " + path);

  std::vector<RawLogRecord> out;
  std::set<std::string> seen;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    nlohmann::json j = nlohmann::json::parse(line, nullptr, false);
    if (j.is_discarded()) throw ParseError(line_no, "invalid JSON");
    RawLogRecord rec;
    try {
      if (!j.contains("id")) throw MissingField("id");
      if (!j.contains("query")) throw MissingField("query");
      if (!j.contains("records")) throw MissingField("records");
      rec.id = j.at("id").get<std::string>();
      rec.query = j.at("query").get<std::string>();
      rec.records = records_from_json(j.at("records"));
      for (const auto& r : rec.records) r.validate();
    } catch (const RoutingError& e) {
      throw InvariantViolation(line_no, rec.id.empty() ? "?" : rec.id,
                               e.what());
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(line_no, e.what());
    }
    if (rec.records.empty()) {
      throw InvariantViolation(line_no, rec.id, "records must be non-empty");
    }
    if (!seen.insert(rec.id).second) throw DuplicateId(rec.id);
    out.push_back(std::move(rec));
  }
  return out;
}

AugmentResult augment_logs(const std::vector<RawLogRecord>& raw,
                           Deconstructor& deconstructor, Embedder& embedder) {
  if (raw.empty()) throw InvalidConfig("no raw records to augment");

  AugmentResult result;
  result.store.embedder_tag = embedder.tag();
  for (const auto& rec : raw) {
    CapabilityProfile profile;
    try {
      profile = deconstructor.deconstruct(rec.query);
    } catch (const RoutingError&) {
      ++result.skipped;
      continue;
    }
    HistoryEntry entry{rec.id, rec.query, std::move(profile), rec.records};
    entry.validate();
    result.store.vectors.emplace(
        entry.id, embed_for_ranking(entry.query, entry.profile, embedder));
    result.store.entries.push_back(std::move(entry));
  }
  if (result.store.entries.empty()) throw AllRecordsFailed();
  std::sort(result.store.entries.begin(), result.store.entries.end(),
            [](const HistoryEntry& a, const HistoryEntry& b) {
              return a.id < b.id;
            });
  return result;
}

void append_entry(LogStore& store, const HistoryEntry& entry,
                  std::optional<EmbeddingVector> vector) {
  entry.validate();
  if (store.has_id(entry.id)) throw DuplicateId(entry.id);
  if (vector) store.vectors.emplace(entry.id, std::move(*vector));
  store.entries.push_back(entry);
  if (store.path) {
    std::ofstream out(*store.path, std::ios::app);
    if (!out) throw IoError("cannot append to store file: " + *store.path);
    out << entry_to_jsonl(store, entry) << '\n';
  }
}

}  // namespace decor
