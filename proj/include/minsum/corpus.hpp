#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

namespace minsum {

// One time-ordered spoken segment. seq orders utterances within a
// (date, meeting) pair; text is the cleaned content.
struct Utterance {
  std::string id;
  std::int64_t seq = 0;
  std::string date;
  std::string meeting;
  std::string speaker;
  std::string text;

  bool operator==(const Utterance&) const = default;
};

struct MeetingKey {
  std::string date;
  std::string meeting;

  auto operator<=>(const MeetingKey&) const = default;
};

// Immutable, chronologically ordered view of the minutes. Iteration order is
// (date, meeting, seq) ascending, and each (date, meeting) group occupies a
// contiguous range.
class Corpus {
 public:
  Corpus() = default;

  // Sorts, validates uniqueness of (date, meeting, seq) and of ids, and
  // builds the lookup indexes.
  static Corpus from_utterances(std::vector<Utterance> utterances);

  const std::vector<Utterance>& utterances() const { return utterances_; }
  std::size_t size() const { return utterances_.size(); }

  std::vector<MeetingKey> meetings() const;

  // Contiguous index range [first, second) of a meeting; (0, 0) if absent.
  std::pair<std::size_t, std::size_t> meeting_range(const MeetingKey& key) const;

  const Utterance* by_id(std::string_view id) const;

  // Utterances of one speaker within one meeting, in seq order.
  std::vector<const Utterance*> by_speaker(const MeetingKey& key, std::string_view speaker) const;

 private:
  std::vector<Utterance> utterances_;
  std::map<MeetingKey, std::pair<std::size_t, std::size_t>> meeting_ranges_;
  std::map<std::string, std::size_t, std::less<>> id_index_;
};

// Removes every occurrence of every noise literal (to a fixed point), then
// normalizes whitespace. The result may be empty.
std::string clean_text(std::string_view raw, std::span<const std::string> noise);

inline const std::vector<std::string> kDefaultNoise = {"（拍手）", "--"};

// Loads line-delimited {id, seq, date, meeting, speaker, text} records,
// cleans each text, and drops utterances whose cleaned text is empty.
// A first line of the form {"meta": ...} is skipped.
Corpus load_corpus(const std::string& path, std::span<const std::string> noise);

void save_corpus(const std::string& path, const Corpus& corpus,
                 const nlohmann::json& meta = nlohmann::json());

// One summarization task record (Formal-Test style).
struct SummaryTask {
  std::string id;
  std::string date;
  std::string meeting;
  std::string main_topic;  // may contain the literal "<br>" separator
  std::string subtopic;
  std::string question_speaker;
  std::string answer_speaker;
  int question_length = 0;  // character budget
  int answer_length = 0;    // character budget
  std::optional<std::string> question_summary;
  std::optional<std::string> answer_summary;
};

// Loads a JSON array of task records carrying the English field names
// ("ID", "Date", "Meeting", "Main topic", "Subtopic", "Question speaker",
// "Answer speaker", "Question length", "Answer length", optional
// "Question summary" / "Answer summary"). null or "None" summaries map to
// absent. Unrecognized fields are ignored.
std::vector<SummaryTask> load_tasks(const std::string& path);

enum class TaskRole { question, answer };

// Task speaker for the role, with any trailing fullwidth-parenthesized
// party suffix stripped: "酒井大史（民主党）" -> "酒井大史".
std::string task_speaker(const SummaryTask& task, TaskRole role);

// Utterances matching the task's (date, meeting) and the role's speaker, in
// seq order. Empty result is the "no candidates" condition.
std::vector<const Utterance*> candidate_pool(const Corpus& corpus, const SummaryTask& task,
                                             TaskRole role);

}  // namespace minsum
