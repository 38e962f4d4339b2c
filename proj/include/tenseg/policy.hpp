#pragma once

#include <array>
#include <stdexcept>

namespace tenseg {

// A gait: three motor commands in optimizer space. chi[i] in [0,1] maps
// affinely to a signed speed command v in [-1,1]; chi = 0.5 stops the motor.
struct Policy {
    std::array<double, 3> chi{0.5, 0.5, 0.5};

    Policy() = default;
    Policy(double c0, double c1, double c2) : chi{c0, c1, c2} { validate(); }

    double command(int motor) const { return 2.0 * (chi[motor] - 0.5); }

    std::array<double, 3> commands() const {
        return {command(0), command(1), command(2)};
    }

    static Policy from_commands(double v0, double v1, double v2) {
        return Policy(0.5 * v0 + 0.5, 0.5 * v1 + 0.5, 0.5 * v2 + 0.5);
    }

    void validate() const {
        for (double c : chi)
            if (!(c >= 0.0 && c <= 1.0))
                throw std::invalid_argument("Policy: chi coordinates must lie in [0,1]");
    }

    bool operator==(const Policy& o) const { return chi == o.chi; }
};

} // namespace tenseg
