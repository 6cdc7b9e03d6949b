#include "motgnn/metrics.hpp"

#include "motgnn/error.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>

namespace motgnn {

namespace {

void check_classes(const std::vector<int>& y, const char* what) {
    for (int v : y)
        if (v != 0 && v != 1) throw Error(std::string(what) + ": labels must be 0 or 1");
}

// t_{0.975,df} for df = 1..200
const double kT975[200] = {
    12.7062047364321, 4.30265272969614, 3.18244630528426, 2.7764451051978, 2.57058183563631,
    2.44691185114497, 2.36462425159278, 2.30600413520417, 2.2621571628541, 2.22813885196494,
    2.20098516008295, 2.17881282966342, 2.16036865646101, 2.14478668791693, 2.13144954555932,
    2.11990529922101, 2.10981557783318, 2.10092204024096, 2.09302405440826, 2.08596344726584,
    2.07961384472766, 2.07387306790401, 2.06865761041904, 2.06389856162802, 2.05953855275329,
    2.05552943864287, 2.05183051648028, 2.04840714179524, 2.0452296421327, 2.04227245630124,
    2.03951344639641, 2.0369333434601, 2.03451529744934, 2.03224450931772, 2.03010792825034,
    2.02809400098045, 2.02619246302911, 2.02439416391197, 2.02269092003676, 2.02107539030627,
    2.01954097044138, 2.01808170281844, 2.01669219922782, 2.01536757444376, 2.01410338888085,
    2.01289559891943, 2.01174051372977, 2.01063475762423, 2.00957523712924, 2.00855911210076,
    2.00758377031584, 2.00664680506169, 2.00574599531787, 2.00487928818806, 2.00404478328915,
    2.00324071884787, 2.00246545929101, 2.00171748414524, 2.00099537808827, 2.00029782201426,
    1.99962358499494, 1.99897151703338, 1.99834054252074, 1.99772965431769, 1.997137908392,
    1.99656441895231, 1.9960083540253, 1.99546893142984, 1.99494541510724, 1.99443711177119,
    1.99394336784563, 1.99346356666187, 1.99299712588985, 1.99254349518093, 1.99210215400224,
    1.99167260964466, 1.99125439538838, 1.99084706881169, 1.99045021023013, 1.99006342125445,
    1.9896863234569, 1.98931855713657, 1.98895978017516, 1.98860966697571, 1.98826790747722,
    1.98793420623902, 1.98760828158907, 1.98728986483117, 1.98697869950628, 1.98667454070377,
    1.98637715441862, 1.98608631695113, 1.98580181434582, 1.9855234418666, 1.98525100350919,
    1.98498431153102, 1.98472318602712, 1.98446745442669, 1.98421695150868, 1.98397151844963,
    1.98373100288528, 1.98349525849594, 1.98326414470971, 1.98303752642299, 1.98281527373715,
    1.98259726171029, 1.98238337012302, 1.98217348325745, 1.98196748968847, 1.98176528208651,
    1.98156675703107, 1.9813718148344, 1.98118035937458, 1.98099229793751, 1.9808075410672,
    1.98062600242394, 1.98044759864973, 1.98027224924071, 1.98009987642601, 1.97993040505278,
    1.97976376247693, 1.97959987845933, 1.97943868506709, 1.97928011657968, 1.97912410939962,
    1.97897060196739, 1.97881953468052, 1.97867084981636, 1.97852449145861, 1.97838040542715,
    1.97823853921126, 1.97809884190572, 1.97796126415, 1.97782575807005, 1.9776922772228,
    1.97756077654308, 1.97743121229289, 1.97730354201292, 1.97717772447612, 1.97705371964339,
    1.97693148862102, 1.97681099362009, 1.97669219791747, 1.97657506581854, 1.97645956262142,
    1.9763456545827, 1.97623330888459, 1.97612249360336, 1.97601317767915, 1.97590533088691,
    1.97579892380855, 1.97569392780619, 1.97559031499646, 1.97548805822583, 1.97538713104688,
    1.97528750769547, 1.97518916306887, 1.9750920727046, 1.97499621276023, 1.97490155999377,
    1.97480809174498, 1.97471578591719, 1.97462462095996, 1.97453457585227, 1.97444563008636,
    1.97435776365219, 1.97427095702238, 1.97418519113782, 1.97410044739363, 1.97401670762578,
    1.97393395409807, 1.97385216948961, 1.97377133688277, 1.97369143975146, 1.9736124619499,
    1.97353438770174, 1.97345720158956, 1.9733808885447, 1.97330543383747, 1.97323082306765,
    1.97315704215537, 1.97308407733222, 1.97301191513268, 1.97294054238587, 1.9728699462075,
    1.97280011399213, 1.97273103340569, 1.97266269237817, 1.97259507909662, 1.97252818199834,
    1.97246198976431, 1.97239649131276, 1.972331675793, 1.97226753257946, 1.97220405126583,
    1.9721412216595, 1.97207903377602, 1.9720174778339, 1.97195654424939, 1.97189622363161,
};

} // namespace

double accuracy(const std::vector<int>& y_true, const std::vector<int>& y_pred) {
    if (y_true.size() != y_pred.size() || y_true.empty())
        throw Error("accuracy: label vectors empty or of unequal length");
    std::size_t hits = 0;
    for (std::size_t i = 0; i < y_true.size(); ++i)
        if (y_true[i] == y_pred[i]) ++hits;
    return static_cast<double>(hits) / static_cast<double>(y_true.size());
}

double f1_score(const std::vector<int>& y_true, const std::vector<int>& y_pred) {
    if (y_true.size() != y_pred.size() || y_true.empty())
        throw Error("f1_score: label vectors empty or of unequal length");
    check_classes(y_true, "f1_score");
    check_classes(y_pred, "f1_score");
    std::size_t tp = 0, fp = 0, fn = 0;
    for (std::size_t i = 0; i < y_true.size(); ++i) {
        if (y_pred[i] == 1 && y_true[i] == 1) ++tp;
        else if (y_pred[i] == 1 && y_true[i] == 0) ++fp;
        else if (y_pred[i] == 0 && y_true[i] == 1) ++fn;
    }
    const std::size_t denom = 2 * tp + fp + fn;
    if (denom == 0) return 0.0;
    return 2.0 * static_cast<double>(tp) / static_cast<double>(denom);
}

double auc(const std::vector<int>& y_true, const std::vector<double>& scores) {
    if (y_true.size() != scores.size() || y_true.empty())
        throw Error("auc: label and score vectors empty or of unequal length");
    check_classes(y_true, "auc");

    const std::size_t n = y_true.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });

    // Doubled rank sum over positives: a tie group occupying sorted
    // positions [a, b) has average rank (a+1+b)/2, so its doubled rank
    // a+1+b stays an exact integer.
    std::uint64_t pos = 0, neg = 0;
    std::int64_t r2 = 0;
    std::size_t a = 0;
    while (a < n) {
        std::size_t b = a + 1;
        while (b < n && scores[order[b]] == scores[order[a]]) ++b;
        const std::int64_t doubled = static_cast<std::int64_t>(a + 1 + b);
        for (std::size_t k = a; k < b; ++k) {
            if (y_true[order[k]] == 1) {
                r2 += doubled;
                ++pos;
            } else {
                ++neg;
            }
        }
        a = b;
    }
    if (pos == 0 || neg == 0) throw Error("auc: needs both classes present");

    // 2U = r2 - n_pos*(n_pos+1); AUC = 2U / (2*n_pos*n_neg)
    const std::int64_t num = r2 - static_cast<std::int64_t>(pos * (pos + 1));
    return static_cast<double>(num) / static_cast<double>(2 * pos * neg);
}

Summary summarize(const std::vector<double>& values) {
    const std::size_t n = values.size();
    if (n == 0) throw Error("summarize: no values");
    Summary s;
    s.mean = std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(n);
    if (n == 1) {
        s.ci_low = s.ci_high = s.mean;
        return s;
    }
    double ss = 0.0;
    for (double v : values) {
        const double d = v - s.mean;
        ss += d * d;
    }
    s.sd = std::sqrt(ss / static_cast<double>(n - 1));
    const double half = t_quantile_975(n - 1) * s.sd / std::sqrt(static_cast<double>(n));
    s.ci_low = s.mean - half;
    s.ci_high = s.mean + half;
    return s;
}

double t_quantile_975(std::size_t df) {
    if (df == 0) throw Error("t_quantile_975: df must be positive");
    if (df <= 200) return kT975[df - 1];
    return 1.959963984540054;
}

} // namespace motgnn
