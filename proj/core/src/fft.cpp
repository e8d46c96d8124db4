#include "fft.hpp"

#include <fftw3.h>

#include <mutex>
#include <stdexcept>

namespace pfocal::fft {

namespace {

std::mutex& planner_mutex() {
    static std::mutex m;
    return m;
}

class PlanGuard {
public:
    explicit PlanGuard(fftw_plan plan) : plan_(plan) {
        if (plan_ == nullptr) throw std::runtime_error("fftw plan creation failed");
    }
    ~PlanGuard() {
        std::lock_guard lock(planner_mutex());
        fftw_destroy_plan(plan_);
    }
    PlanGuard(const PlanGuard&) = delete;
    PlanGuard& operator=(const PlanGuard&) = delete;

    void execute() const { fftw_execute(plan_); }

private:
    fftw_plan plan_;
};

}  // namespace

std::vector<std::complex<double>> r2c(std::span<const double> input) {
    const int n = static_cast<int>(input.size());
    std::vector<double> in(input.begin(), input.end());
    std::vector<std::complex<double>> out(static_cast<std::size_t>(n) / 2 + 1);
    fftw_plan raw;
    {
        std::lock_guard lock(planner_mutex());
        raw = fftw_plan_dft_r2c_1d(n, in.data(),
                                   reinterpret_cast<fftw_complex*>(out.data()),
                                   FFTW_ESTIMATE);
    }
    PlanGuard plan(raw);
    plan.execute();
    return out;
}

std::vector<std::complex<double>> c2c_backward(std::span<const std::complex<double>> input) {
    const int n = static_cast<int>(input.size());
    std::vector<std::complex<double>> in(input.begin(), input.end());
    std::vector<std::complex<double>> out(static_cast<std::size_t>(n));
    fftw_plan raw;
    {
        std::lock_guard lock(planner_mutex());
        raw = fftw_plan_dft_1d(n, reinterpret_cast<fftw_complex*>(in.data()),
                               reinterpret_cast<fftw_complex*>(out.data()),
                               FFTW_BACKWARD, FFTW_ESTIMATE);
    }
    PlanGuard plan(raw);
    plan.execute();
    return out;
}

}  // namespace pfocal::fft
