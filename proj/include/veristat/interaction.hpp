#pragma once

#include <filesystem>
#include <iosfwd>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

namespace veristat {

enum class InteractionMode { prompt, assume_yes, assume_no, replay };

const char* to_string(InteractionMode mode);
std::optional<InteractionMode> parse_interaction_mode(const std::string& name);

/// Where answers to plot confirmations come from.
struct InteractionPolicy {
  InteractionMode mode = InteractionMode::assume_yes;
  std::optional<std::filesystem::path> replay_source;
  std::optional<std::filesystem::path> transcript_sink;

  /// Throws SpecError when replay mode has no source.
  void validate() const;
};

struct TranscriptEntry {
  std::string statement_id;
  std::string plot_kind;
  std::string question;
  std::string answer;
  std::string plot_file;

  friend bool operator==(const TranscriptEntry&, const TranscriptEntry&) = default;
};

/// Resolves y/n answers under a policy and records every exchange.
///
/// Replay files and transcripts share one line format, `<statement-id> <answer>`, with `#`
/// comments, so a transcript can be replayed verbatim.
class Interaction {
 public:
  /// Throws InteractionError if a replay source cannot be read.
  explicit Interaction(InteractionPolicy policy);
  Interaction(InteractionPolicy policy, std::istream& in, std::ostream& out);

  /// Serialized across threads. Throws InteractionError when no answer is available.
  std::string ask(const std::string& statement_id, const std::string& question,
                  const std::string& plot_kind, const std::filesystem::path& plot_file);

  const InteractionPolicy& policy() const noexcept { return policy_; }
  std::vector<TranscriptEntry> transcript() const;

  /// Writes the transcript to the policy's sink, if one is configured.
  void flush_transcript() const;

 private:
  void load_replay();

  InteractionPolicy policy_;
  std::istream* in_;
  std::ostream* out_;
  std::map<std::string, std::string> replay_;
  std::vector<TranscriptEntry> transcript_;
  mutable std::mutex mutex_;
};

std::string format_transcript(const std::vector<TranscriptEntry>& entries);

}  // namespace veristat
