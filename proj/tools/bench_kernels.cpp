// Times the serial reference kernels against the dispatched ones and
// verifies the outputs stay bitwise identical while doing so.
#include <chrono>
#include <cstdio>
#include <string>
#include <vector>

#include "motgnn/kernels.hpp"
#include "motgnn/rng.hpp"
#include "motgnn/tensor.hpp"

using namespace motgnn;

namespace {

Tensor2 random_matrix(std::size_t r, std::size_t c, Rng& rng) {
    Tensor2 m;
    m.resize(r, c);
    for (double& v : m.data) v = rng.uniform(-1.0, 1.0);
    return m;
}

template <typename F>
double time_best_of(int rounds, F&& fn) {
    double best = 1e300;
    for (int i = 0; i < rounds; ++i) {
        const auto t0 = std::chrono::steady_clock::now();
        fn();
        const auto t1 = std::chrono::steady_clock::now();
        best = std::min(best, std::chrono::duration<double>(t1 - t0).count());
    }
    return best;
}

struct Case {
    std::size_t n, k, m;
};

}  // namespace

int main() {
    std::printf("threads available: %d\n", kernels::thread_count());
    std::printf("%-26s %12s %12s %9s %s\n", "kernel", "serial (ms)", "dispatch", "speedup",
                "bitwise");

    const Case cases[] = {{64, 512, 64}, {256, 1024, 64}, {512, 2048, 128}};
    Rng rng(7);
    for (const Case& c : cases) {
        const Tensor2 a = random_matrix(c.n, c.k, rng);
        const Tensor2 b = random_matrix(c.k, c.m, rng);
        const Tensor2 bt = random_matrix(c.m, c.k, rng);
        const Tensor2 at = random_matrix(c.k, c.n, rng);
        Tensor2 ref, par;
        std::vector<double> ref_v, par_v;

        const std::string dims = std::to_string(c.n) + "x" + std::to_string(c.k) + "x" +
                                 std::to_string(c.m);
        const int rounds = 5;

        double ts = time_best_of(rounds, [&] { kernels::serial::matmul(a, b, ref); });
        double tp = time_best_of(rounds, [&] { kernels::matmul(a, b, par); });
        std::printf("%-26s %12.3f %12.3f %8.2fx %s\n", ("matmul " + dims).c_str(), ts * 1e3,
                    tp * 1e3, ts / tp, ref.data == par.data ? "yes" : "NO");

        ts = time_best_of(rounds, [&] { kernels::serial::matmul_tn(at, b, ref); });
        tp = time_best_of(rounds, [&] { kernels::matmul_tn(at, b, par); });
        std::printf("%-26s %12.3f %12.3f %8.2fx %s\n", ("matmul_tn " + dims).c_str(), ts * 1e3,
                    tp * 1e3, ts / tp, ref.data == par.data ? "yes" : "NO");

        ts = time_best_of(rounds, [&] { kernels::serial::matmul_nt(a, bt, ref); });
        tp = time_best_of(rounds, [&] { kernels::matmul_nt(a, bt, par); });
        std::printf("%-26s %12.3f %12.3f %8.2fx %s\n", ("matmul_nt " + dims).c_str(), ts * 1e3,
                    tp * 1e3, ts / tp, ref.data == par.data ? "yes" : "NO");

        ts = time_best_of(rounds, [&] { kernels::serial::col_sums(a, ref_v); });
        tp = time_best_of(rounds, [&] { kernels::col_sums(a, par_v); });
        std::printf("%-26s %12.3f %12.3f %8.2fx %s\n",
                    ("col_sums " + std::to_string(c.n) + "x" + std::to_string(c.k)).c_str(),
                    ts * 1e3, tp * 1e3, ts / tp, ref_v == par_v ? "yes" : "NO");
    }
    return 0;
}
