#pragma once

// Dissemination policies. Pure functions of their arguments and the rng
// state: whom to probe or push to, and which chunk each recipient gets.

#include <chunksim/chunk_set.hpp>
#include <chunksim/errors.hpp>
#include <chunksim/model.hpp>
#include <chunksim/rng.hpp>

#include <algorithm>
#include <numeric>
#include <span>
#include <vector>

namespace chunksim {

struct Reply
{
	PeerId from;
	BufferMap map; // empty for blind schemes
};

struct Assignment
{
	PeerId recipient;
	ChunkIndex chunk;

	bool operator==(Assignment const&) const = default;
};

using RecipientAssignment = std::vector<Assignment>;

// k distinct peers out of `candidates`. Random-peer schemes draw uniformly
// without replacement; the bandwidth-aware scheme draws successively, each
// time proportionally to the remaining candidates' upload bandwidth
// (`bandwidths` is parallel to `candidates`).
inline std::vector<PeerId> select_peers(Scheme scheme, std::span<PeerId const> candidates,
	std::span<double const> bandwidths, std::size_t k, Rng& rng)
{
	if (k > candidates.size()) throw NotEnoughNeighbors(k, candidates.size());
	std::vector<PeerId> pool(candidates.begin(), candidates.end());
	std::vector<PeerId> out;
	out.reserve(k);

	if (scheme != Scheme::ba_lu) {
		for (std::size_t i = 0; i < k; ++i) {
			std::size_t j = i + static_cast<std::size_t>(rng.below(pool.size() - i));
			std::swap(pool[i], pool[j]);
			out.push_back(pool[i]);
		}
		return out;
	}

	std::vector<double> weight(bandwidths.begin(), bandwidths.end());
	double total = std::accumulate(weight.begin(), weight.end(), 0.0);
	for (std::size_t i = 0; i < k; ++i) {
		std::size_t pick = pool.size() - 1;
		if (total > 0.0) {
			double x = rng.uniform() * total;
			for (std::size_t j = 0; j < pool.size(); ++j) {
				if (weight[j] <= 0.0) continue;
				if (x < weight[j]) {
					pick = j;
					break;
				}
				x -= weight[j];
				pick = j; // rounding fallback: last positive weight
			}
		}
		else pick = static_cast<std::size_t>(rng.below(pool.size()));
		out.push_back(pool[pick]);
		total -= weight[pick];
		pool.erase(pool.begin() + static_cast<std::ptrdiff_t>(pick));
		weight.erase(weight.begin() + static_cast<std::ptrdiff_t>(pick));
		if (total < 0.0) total = 0.0;
	}
	return out;
}

inline ChunkIndex latest_blind_chunk(ChunkSet const& sender_window)
{
	return sender_window.max();
}

inline ChunkIndex latest_useful_chunk(ChunkSet const& sender_window, BufferMap const& receiver)
{
	return sender_window.max_not_in(receiver.window);
}

// Pairs recipients from this round's replies with chunks, at most m_prime
// pairs, recipients pairwise distinct. The same chunk may go to several
// recipients.
//
// Latest useful: each replying peer gets its latest useful chunk; peers with
// nothing useful are skipped; when more than m_prime remain, the freshest
// useful chunks win and ties are broken at random. Output is ordered by
// decreasing chunk index.
//
// Latest blind: the sender's newest chunk goes to the first
// min(m_prime, |replies|) peers.
inline RecipientAssignment assign_recipients(Scheme scheme, ChunkSet const& sender_window,
	std::span<Reply const> replies, std::size_t m_prime, Rng& rng)
{
	RecipientAssignment out;
	if (!uses_buffer_maps(scheme)) {
		ChunkIndex latest = latest_blind_chunk(sender_window);
		if (latest == no_chunk) return out;
		for (std::size_t i = 0; i < replies.size() && out.size() < m_prime; ++i)
			out.push_back({replies[i].from, latest});
		return out;
	}

	for (auto const& r : replies) {
		ChunkIndex useful = latest_useful_chunk(sender_window, r.map);
		if (useful != no_chunk) out.push_back({r.from, useful});
	}
	if (out.size() > m_prime) {
		for (std::size_t i = out.size() - 1; i > 0; --i)
			std::swap(out[i], out[static_cast<std::size_t>(rng.below(i + 1))]);
	}
	std::stable_sort(out.begin(), out.end(),
		[](Assignment const& a, Assignment const& b) { return a.chunk > b.chunk; });
	if (out.size() > m_prime) out.resize(m_prime);
	return out;
}

} // namespace chunksim
