#include "minsum/corpus.hpp"

#include <algorithm>
#include <fstream>
#include <tuple>

#include "minsum/errors.hpp"
#include "minsum/utf8.hpp"

namespace minsum {

namespace {

using nlohmann::json;

json parse_line(const std::string& line, std::size_t lineno) {
  try {
    return json::parse(line);
  } catch (const json::exception& e) {
    throw DataError("parse error at line " + std::to_string(lineno) + ": " + e.what());
  }
}

std::string require_string(const json& rec, const char* field, std::size_t lineno) {
  if (!rec.contains(field) || !rec[field].is_string()) {
    throw DataError("line " + std::to_string(lineno) + ": missing or non-string field '" + field +
                    "'");
  }
  return rec[field].get<std::string>();
}

std::int64_t require_seq(const json& rec, std::size_t lineno) {
  if (!rec.contains("seq") || !rec["seq"].is_number_integer()) {
    throw DataError("line " + std::to_string(lineno) + ": missing or non-integer field 'seq'");
  }
  const auto seq = rec["seq"].get<std::int64_t>();
  if (seq < 0) throw DataError("line " + std::to_string(lineno) + ": negative seq");
  return seq;
}

}  // namespace

Corpus Corpus::from_utterances(std::vector<Utterance> utterances) {
  std::sort(utterances.begin(), utterances.end(), [](const Utterance& a, const Utterance& b) {
    return std::tie(a.date, a.meeting, a.seq) < std::tie(b.date, b.meeting, b.seq);
  });

  Corpus c;
  c.utterances_ = std::move(utterances);
  for (std::size_t i = 0; i < c.utterances_.size(); ++i) {
    const Utterance& u = c.utterances_[i];
    if (i > 0) {
      const Utterance& prev = c.utterances_[i - 1];
      if (prev.date == u.date && prev.meeting == u.meeting && prev.seq == u.seq) {
        throw DataError("integrity error: duplicate (date, meeting, seq) = (" + u.date + ", " +
                        u.meeting + ", " + std::to_string(u.seq) + ")");
      }
    }
    if (!c.id_index_.emplace(u.id, i).second) {
      throw DataError("integrity error: duplicate utterance id '" + u.id + "'");
    }
    MeetingKey key{u.date, u.meeting};
    auto [it, inserted] = c.meeting_ranges_.try_emplace(key, i, i + 1);
    if (!inserted) it->second.second = i + 1;
  }
  return c;
}

std::vector<MeetingKey> Corpus::meetings() const {
  std::vector<MeetingKey> out;
  out.reserve(meeting_ranges_.size());
  for (const auto& [key, range] : meeting_ranges_) out.push_back(key);
  return out;
}

std::pair<std::size_t, std::size_t> Corpus::meeting_range(const MeetingKey& key) const {
  const auto it = meeting_ranges_.find(key);
  if (it == meeting_ranges_.end()) return {0, 0};
  return it->second;
}

const Utterance* Corpus::by_id(std::string_view id) const {
  const auto it = id_index_.find(id);
  if (it == id_index_.end()) return nullptr;
  return &utterances_[it->second];
}

std::vector<const Utterance*> Corpus::by_speaker(const MeetingKey& key,
                                                 std::string_view speaker) const {
  std::vector<const Utterance*> out;
  const auto [lo, hi] = meeting_range(key);
  for (std::size_t i = lo; i < hi; ++i) {
    if (utterances_[i].speaker == speaker) out.push_back(&utterances_[i]);
  }
  return out;
}

std::string clean_text(std::string_view raw, std::span<const std::string> noise) {
  std::string s(raw);
  bool changed = true;
  while (changed) {
    changed = false;
    for (const std::string& literal : noise) {
      if (literal.empty()) continue;
      std::size_t pos = 0;
      while ((pos = s.find(literal, pos)) != std::string::npos) {
        s.erase(pos, literal.size());
        changed = true;
      }
    }
  }
  return normalize_whitespace(s);
}

Corpus load_corpus(const std::string& path, std::span<const std::string> noise) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open corpus file: " + path);

  std::vector<Utterance> utterances;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    const json rec = parse_line(line, lineno);
    if (lineno == 1 && rec.is_object() && rec.contains("meta")) continue;
    if (!rec.is_object()) {
      throw DataError("line " + std::to_string(lineno) + ": expected a record object");
    }
    Utterance u;
    u.id = require_string(rec, "id", lineno);
    u.seq = require_seq(rec, lineno);
    u.date = require_string(rec, "date", lineno);
    u.meeting = require_string(rec, "meeting", lineno);
    u.speaker = require_string(rec, "speaker", lineno);
    u.text = clean_text(require_string(rec, "text", lineno), noise);
    if (u.text.empty()) continue;  // nothing left after cleaning
    utterances.push_back(std::move(u));
  }
  return Corpus::from_utterances(std::move(utterances));
}

void save_corpus(const std::string& path, const Corpus& corpus, const nlohmann::json& meta) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write corpus file: " + path);
  if (!meta.is_null()) {
    out << json{{"meta", meta}}.dump() << "\n";
  }
  for (const Utterance& u : corpus.utterances()) {
    out << json{{"id", u.id},           {"seq", u.seq},       {"date", u.date},
                {"meeting", u.meeting}, {"speaker", u.speaker}, {"text", u.text}}
               .dump()
        << "\n";
  }
}

namespace {

std::string task_label(const json& rec, std::size_t index) {
  if (rec.is_object() && rec.contains("ID") && rec["ID"].is_string()) {
    return rec["ID"].get<std::string>();
  }
  return "record #" + std::to_string(index);
}

std::string require_task_string(const json& rec, const char* field, const std::string& label) {
  if (!rec.contains(field) || !rec[field].is_string()) {
    throw DataError("schema error in task " + label + ": missing field '" + field + "'");
  }
  return rec[field].get<std::string>();
}

int require_task_length(const json& rec, const char* field, const std::string& label) {
  if (!rec.contains(field) || !rec[field].is_number_integer()) {
    throw DataError("schema error in task " + label + ": missing field '" + field + "'");
  }
  const int v = rec[field].get<int>();
  if (v <= 0) {
    throw DataError("schema error in task " + label + ": field '" + field + "' must be positive");
  }
  return v;
}

std::optional<std::string> optional_summary(const json& rec, const char* field) {
  if (!rec.contains(field) || rec[field].is_null()) return std::nullopt;
  if (!rec[field].is_string()) return std::nullopt;
  std::string v = rec[field].get<std::string>();
  if (v == "None") return std::nullopt;
  return v;
}

}  // namespace

std::vector<SummaryTask> load_tasks(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open task file: " + path);
  json root;
  try {
    in >> root;
  } catch (const json::exception& e) {
    throw DataError("task file parse error: " + std::string(e.what()));
  }
  if (!root.is_array()) throw DataError("task file must be a JSON array of records");

  std::vector<SummaryTask> tasks;
  tasks.reserve(root.size());
  std::size_t index = 0;
  for (const json& rec : root) {
    ++index;
    const std::string label = task_label(rec, index);
    if (!rec.is_object()) throw DataError("schema error in task " + label + ": not an object");
    SummaryTask t;
    t.id = require_task_string(rec, "ID", label);
    t.date = require_task_string(rec, "Date", label);
    t.meeting = require_task_string(rec, "Meeting", label);
    t.main_topic = require_task_string(rec, "Main topic", label);
    t.subtopic = require_task_string(rec, "Subtopic", label);
    t.question_speaker = require_task_string(rec, "Question speaker", label);
    t.answer_speaker = require_task_string(rec, "Answer speaker", label);
    t.question_length = require_task_length(rec, "Question length", label);
    t.answer_length = require_task_length(rec, "Answer length", label);
    t.question_summary = optional_summary(rec, "Question summary");
    t.answer_summary = optional_summary(rec, "Answer summary");
    tasks.push_back(std::move(t));
  }
  return tasks;
}

std::string task_speaker(const SummaryTask& task, TaskRole role) {
  const std::string& raw = role == TaskRole::question ? task.question_speaker : task.answer_speaker;
  auto cps = utf8_decode(raw);
  // Trim whitespace.
  while (!cps.empty() && is_space_cp(cps.back())) cps.pop_back();
  while (!cps.empty() && is_space_cp(cps.front())) cps.erase(cps.begin());
  // Strip trailing fullwidth-parenthesized suffixes: "（...）" at the end.
  constexpr char32_t kOpen = U'（';
  constexpr char32_t kClose = U'）';
  while (!cps.empty() && cps.back() == kClose) {
    std::size_t open = cps.size();
    for (std::size_t i = cps.size() - 1; i-- > 0;) {
      if (cps[i] == kOpen) {
        open = i;
        break;
      }
    }
    if (open == cps.size()) break;  // unbalanced; leave as is
    cps.resize(open);
    while (!cps.empty() && is_space_cp(cps.back())) cps.pop_back();
  }
  return utf8_encode(cps);
}

std::vector<const Utterance*> candidate_pool(const Corpus& corpus, const SummaryTask& task,
                                             TaskRole role) {
  return corpus.by_speaker(MeetingKey{task.date, task.meeting}, task_speaker(task, role));
}

}  // namespace minsum
