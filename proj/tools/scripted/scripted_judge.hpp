#pragma once

#include <memory>
#include <string>

#include "dreval/gateway.hpp"

namespace dreval::scripted {

/// Deterministic rule-based judge. It answers every request kind the
/// evaluator issues (dispatching on the schema title) from lexical cues in
/// the prompt, so fixtures can be recorded without a hosted model. It is a
/// stand-in for offline runs and tests, not a quality judge.
std::shared_ptr<CompletionBackend> make_scripted_judge();

/// The structured reply the scripted judge gives for `req`.
json scripted_reply(const JudgeRequest& req);

}  // namespace dreval::scripted
