#include "miniamr/Task.hpp"

#include <algorithm>

namespace miniamr {

CompletionToken::CompletionToken() : state_(std::make_shared<State>()) {}

CompletionToken CompletionToken::completed() {
    CompletionToken t;
    t.state_->done.store(true, std::memory_order_release);
    return t;
}

void CompletionToken::wait() const {
    if (done()) return;
    std::unique_lock lk(state_->m);
    state_->cv.wait(lk, [&] { return done(); });
}

void CompletionToken::mark_done() const {
    {
        std::lock_guard lk(state_->m);
        state_->done.store(true, std::memory_order_release);
    }
    state_->cv.notify_all();
}

namespace {

thread_local std::vector<AsyncScope*> t_scopes;
thread_local std::vector<CompletionToken> t_stream;

void prune(std::vector<CompletionToken>& v) {
    std::erase_if(v, [](const CompletionToken& t) { return t.done(); });
}

} // namespace

namespace async_tracking {

void note_launch(const CompletionToken& t) {
    prune(t_stream);
    t_stream.push_back(t);
    for (AsyncScope* s : t_scopes) s->tasks_.push_back(t);
}

std::vector<CompletionToken> pending_for_release() {
    std::vector<CompletionToken> out;
    if (!t_scopes.empty()) {
        out = t_scopes.back()->tasks_;
    } else {
        out = t_stream;
    }
    prune(out);
    return out;
}

} // namespace async_tracking

AsyncScope::AsyncScope() { t_scopes.push_back(this); }

AsyncScope::~AsyncScope() {
    // Scopes are strictly nested per thread.
    auto it = std::find(t_scopes.begin(), t_scopes.end(), this);
    if (it != t_scopes.end()) t_scopes.erase(it);
}

} // namespace miniamr
