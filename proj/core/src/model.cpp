#include "gridlaa/model.hpp"

#include <algorithm>
#include <sstream>

#include "gridlaa/errors.hpp"

namespace gridlaa {

SusceptanceBlocks build_susceptance(const GridCase& grid) {
    const int n = grid.n_bus();
    const int ng = grid.n_gen();
    const int nl = grid.n_load();

    SusceptanceBlocks s;
    s.full = MatrixX::Zero(n, n);
    for (const auto& br : grid.branches) {
        if (!br.in_service) continue;
        int i = grid.index_of(br.from);
        int j = grid.index_of(br.to);
        double w = 1.0 / br.reactance;  // parallel branches accumulate
        s.full(i, j) -= w;
        s.full(j, i) -= w;
        s.full(i, i) += w;
        s.full(j, j) += w;
    }
    s.gg = s.full.topLeftCorner(ng, ng);
    s.gl = s.full.topRightCorner(ng, nl);
    s.lg = s.full.bottomLeftCorner(nl, ng);
    s.ll = s.full.bottomRightCorner(nl, nl);
    return s;
}

AttackSpec passive_attack(const GridCase& grid) {
    const int ng = grid.n_gen();
    const int nl = grid.n_load();
    AttackSpec a;
    a.gain_gen = MatrixX::Zero(nl, ng);
    a.gain_load = MatrixX::Zero(nl, nl);
    a.step = VectorX::Zero(nl);
    a.vulnerable.resize(nl);
    for (int i = 0; i < nl; ++i)
        a.vulnerable[i] = grid.loads[i].vulnerable_fraction * grid.loads[i].demand_pu;
    return a;
}

void validate_attack(const AttackSpec& a, const GridCase& grid, const DynamicParams& params) {
    const int ng = grid.n_gen();
    const int nl = grid.n_load();
    if (a.gain_gen.rows() != nl || a.gain_gen.cols() != ng || a.gain_load.rows() != nl ||
        a.gain_load.cols() != nl || a.step.size() != nl || a.vulnerable.size() != nl)
        throw ValidationError("attack matrices do not match the case dimensions");

    std::vector<bool> is_victim(nl, false);
    for (int v : a.victims) {
        if (v < 0 || v >= nl) throw ValidationError("victim index out of range");
        is_victim[v] = true;
    }
    std::vector<bool> gen_sensed(ng, false), load_sensed(nl, false);
    for (const Sensor& s : a.sensors) {
        if (s.kind == BusKind::generator) {
            if (s.position < 0 || s.position >= ng)
                throw ValidationError("generator sensor index out of range");
            gen_sensed[s.position] = true;
        } else {
            if (s.position < 0 || s.position >= nl)
                throw ValidationError("load sensor index out of range");
            load_sensed[s.position] = true;
        }
    }

    for (int v = 0; v < nl; ++v) {
        for (int s = 0; s < ng; ++s)
            if (a.gain_gen(v, s) != 0.0 && (!is_victim[v] || !gen_sensed[s]))
                throw ValidationError("gain outside the victim x sensor support at load row " +
                                      std::to_string(grid.loads[v].bus));
        for (int s = 0; s < nl; ++s)
            if (a.gain_load(v, s) != 0.0 && (!is_victim[v] || !load_sensed[s]))
                throw ValidationError("gain outside the victim x sensor support at load row " +
                                      std::to_string(grid.loads[v].bus));
        if (a.step[v] != 0.0 && !is_victim[v])
            throw ValidationError("step outside the victim set at load bus " +
                                  std::to_string(grid.loads[v].bus));
    }

    if (a.exploration) return;

    const double wmax = params.omega_max_pu();
    for (int v = 0; v < nl; ++v) {
        int bus = grid.loads[v].bus;
        if (a.step[v] < -grid.loads[v].demand_pu - 1e-12)
            throw ValidationError("step at bus " + std::to_string(bus) +
                                  " would drive demand negative");
        if (a.step[v] > a.vulnerable[v] + 1e-12)
            throw ValidationError("step at bus " + std::to_string(bus) +
                                  " exceeds the vulnerable pool");
        double spent = 0;
        for (int s = 0; s < ng; ++s) spent += std::abs(a.gain_gen(v, s)) * wmax;
        for (int s = 0; s < nl; ++s) spent += std::abs(a.gain_load(v, s)) * wmax;
        double budget = (a.vulnerable[v] - a.step[v]) / 2.0;
        if (spent > budget + 1e-12) {
            std::ostringstream os;
            os << "gain budget violated at bus " << bus << ": " << spent << " > " << budget;
            throw ValidationError(os.str());
        }
    }
}

SecondOrderModel assemble_model(const GridCase& grid, const DynamicParams& params,
                                const AttackSpec& attack) {
    validate_params(params, grid);
    validate_attack(attack, grid, params);

    const int ng = grid.n_gen();
    const int nl = grid.n_load();
    const int n = ng + nl;
    SusceptanceBlocks sus = build_susceptance(grid);

    SecondOrderModel m;
    m.n_gen = ng;
    m.n_load = nl;
    m.mass = MatrixX::Zero(n, n);
    m.mass.topLeftCorner(ng, ng) = params.inertia.asDiagonal();

    m.damping = MatrixX::Zero(n, n);
    m.damping.topLeftCorner(ng, ng) =
        MatrixX((params.kp + params.gen_damping).asDiagonal());
    m.damping.bottomLeftCorner(nl, ng) = -attack.gain_gen;
    m.damping.bottomRightCorner(nl, nl) = MatrixX(params.load_damping.asDiagonal()) -
                                          attack.gain_load;

    m.stiffness = sus.full;
    m.stiffness.topLeftCorner(ng, ng) += MatrixX(params.ki.asDiagonal());

    // deviation coordinates about the pre-attack equilibrium: base demand cancels
    m.forcing = VectorX::Zero(n);
    for (int i = 0; i < nl; ++i)
        m.forcing[ng + i] = -attack.step[i];
    return m;
}

StatePencil to_pencil(const SecondOrderModel& m) {
    const int n = m.n();
    StatePencil p;
    p.n_gen = m.n_gen;
    p.n_load = m.n_load;
    p.a = MatrixX::Zero(2 * n, 2 * n);
    p.a.topLeftCorner(n, n) = m.damping;
    p.a.topRightCorner(n, n) = m.mass;
    p.a.bottomLeftCorner(n, n) = m.mass;
    p.b = MatrixX::Zero(2 * n, 2 * n);
    p.b.topLeftCorner(n, n) = m.stiffness;
    p.b.bottomRightCorner(n, n) = -m.mass;
    return p;
}

GainPerturbation gain_perturbation(const StatePencil& pencil, int victim, const Sensor& sensor) {
    const int ng = pencil.n_gen;
    const int nl = pencil.n_load;
    if (victim < 0 || victim >= nl) throw ValidationError("victim index out of range");
    GainPerturbation e;
    e.row = ng + victim;
    if (sensor.kind == BusKind::generator) {
        if (sensor.position < 0 || sensor.position >= ng)
            throw ValidationError("generator sensor index out of range");
        e.col = sensor.position;
    } else {
        if (sensor.position < 0 || sensor.position >= nl)
            throw ValidationError("load sensor index out of range");
        e.col = ng + sensor.position;
    }
    e.value = -1.0;  // d(damping)/dK is -I for either sensor kind
    return e;
}

}  // namespace gridlaa
