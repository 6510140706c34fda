#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <random>
#include <string_view>

namespace chunksim {

// splitmix64 finalizer; used to derive independent sub-seeds.
constexpr std::uint64_t mix64(std::uint64_t x) noexcept
{
	x += 0x9e3779b97f4a7c15ULL;
	x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
	x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
	return x ^ (x >> 31);
}

constexpr std::uint64_t hash_tag(std::string_view tag) noexcept
{
	std::uint64_t h = 0xcbf29ce484222325ULL;
	for (char ch : tag) {
		h ^= static_cast<unsigned char>(ch);
		h *= 0x100000001b3ULL;
	}
	return h;
}

// Sub-stream seed for (master, tag, index). Streams with different tags or
// indices are decorrelated, so varying one experiment axis leaves the other
// draws untouched.
constexpr std::uint64_t substream_seed(std::uint64_t master, std::string_view tag,
	std::uint64_t index = 0) noexcept
{
	return mix64(mix64(master ^ hash_tag(tag)) + mix64(index + 0x632be59bd9b4e019ULL));
}

// Thin wrapper over mt19937_64. The standard distributions are
// implementation-defined, so the few we need are spelled out here to keep
// runs bit-identical across standard libraries.
class Rng
{
public:
	using result_type = std::uint64_t;

	Rng() : Rng(0) {}
	explicit Rng(std::uint64_t seed) : m_engine(seed) {}
	Rng(std::uint64_t master, std::string_view tag, std::uint64_t index = 0)
		: m_engine(substream_seed(master, tag, index))
	{}

	static constexpr result_type min() { return 0; }
	static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }
	result_type operator()() { return m_engine(); }

	// uniform in [0, 1)
	double uniform()
	{
		return static_cast<double>(m_engine() >> 11) * 0x1.0p-53;
	}

	// uniform integer in [0, n); n must be > 0
	std::uint64_t below(std::uint64_t n)
	{
		std::uint64_t const limit = max() - max() % n;
		std::uint64_t x;
		do x = m_engine();
		while (x >= limit);
		return x % n;
	}

	bool bernoulli(double p) { return uniform() < p; }

	double normal()
	{
		// Box-Muller, one variate per call
		double u1;
		do u1 = uniform();
		while (u1 <= 0.0);
		double const u2 = uniform();
		return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
	}

	double lognormal(double median, double sigma)
	{
		return median * std::exp(sigma * normal());
	}

private:
	std::mt19937_64 m_engine;
};

} // namespace chunksim
