#include "veristat/interaction.hpp"

#include <fstream>
#include <iostream>
#include <sstream>

#include "veristat/error.hpp"

namespace veristat {

const char* to_string(InteractionMode mode) {
  switch (mode) {
    case InteractionMode::prompt: return "prompt";
    case InteractionMode::assume_yes: return "assume_yes";
    case InteractionMode::assume_no: return "assume_no";
    case InteractionMode::replay: return "replay";
  }
  return "?";
}

std::optional<InteractionMode> parse_interaction_mode(const std::string& name) {
  for (auto m : {InteractionMode::prompt, InteractionMode::assume_yes, InteractionMode::assume_no,
                 InteractionMode::replay}) {
    if (name == to_string(m)) return m;
  }
  return std::nullopt;
}

void InteractionPolicy::validate() const {
  if (mode == InteractionMode::replay && !replay_source) {
    throw SpecError("replay interaction requires a replay source");
  }
}

Interaction::Interaction(InteractionPolicy policy) : Interaction(std::move(policy), std::cin, std::cout) {}

Interaction::Interaction(InteractionPolicy policy, std::istream& in, std::ostream& out)
    : policy_(std::move(policy)), in_(&in), out_(&out) {
  policy_.validate();
  if (policy_.mode == InteractionMode::replay) load_replay();
}

void Interaction::load_replay() {
  std::ifstream file(*policy_.replay_source);
  if (!file) throw InteractionError("cannot read replay file '" + policy_.replay_source->string() + "'");
  std::string line;
  while (std::getline(file, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::istringstream fields(line);
    std::string id;
    if (!(fields >> id) || id.front() == '#') continue;
    std::string answer;
    fields >> answer;
    replay_[id] = answer;
  }
}

std::string Interaction::ask(const std::string& statement_id, const std::string& question,
                             const std::string& plot_kind, const std::filesystem::path& plot_file) {
  std::lock_guard lock(mutex_);
  std::string answer;
  switch (policy_.mode) {
    case InteractionMode::assume_yes:
      answer = "y";
      break;
    case InteractionMode::assume_no:
      answer = "n";
      break;
    case InteractionMode::replay: {
      auto it = replay_.find(statement_id);
      if (it == replay_.end()) {
        throw InteractionError("replay file has no answer for '" + statement_id + "'");
      }
      answer = it->second;
      break;
    }
    case InteractionMode::prompt:
      *out_ << "[" << statement_id << "] plot written to " << plot_file.string() << "\n"
            << question << std::flush;
      if (!std::getline(*in_, answer)) {
        throw InteractionError("no answer for '" + statement_id + "': input closed");
      }
      if (!answer.empty() && answer.back() == '\r') answer.pop_back();
      break;
  }
  transcript_.push_back({statement_id, plot_kind, question, answer, plot_file.string()});
  return answer;
}

std::vector<TranscriptEntry> Interaction::transcript() const {
  std::lock_guard lock(mutex_);
  return transcript_;
}

std::string format_transcript(const std::vector<TranscriptEntry>& entries) {
  std::string out;
  for (const auto& e : entries) out += e.statement_id + " " + e.answer + "\n";
  return out;
}

void Interaction::flush_transcript() const {
  if (!policy_.transcript_sink) return;
  std::ofstream file(*policy_.transcript_sink);
  if (!file) {
    throw InteractionError("cannot write transcript '" + policy_.transcript_sink->string() + "'");
  }
  file << "# plot confirmation answers\n" << format_transcript(transcript());
}

}  // namespace veristat
