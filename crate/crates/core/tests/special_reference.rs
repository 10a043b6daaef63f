//! Mittag-Leffler values against a frozen high-precision table
//! (80-digit power series, computed once offline).

#![allow(clippy::excessive_precision)]

use ultraslow::special::mittag_leffler;

const TABLE: &[(f64, f64, f64, f64)] = &[
    (0.2, 0.2, 0.1, 0.178688710716281348),
    (0.2, 0.2, 0.5, 0.093107212317280324378),
    (0.2, 0.2, 1.0, 0.050669327168145042792),
    (0.2, 0.2, 2.0, 0.021559364493095051416),
    (0.2, 1.0, 0.1, 0.9013371885912669951),
    (0.2, 1.0, 0.5, 0.64296499192613900796),
    (0.2, 1.0, 1.0, 0.47110068893348294927),
    (0.2, 1.0, 2.0, 0.30567869641870601148),
    (0.2, 1.2, 0.1, 0.98662811408733004898),
    (0.2, 1.2, 0.5, 0.71407001614772198408),
    (0.2, 1.2, 1.0, 0.52889931106651705073),
    (0.2, 1.2, 2.0, 0.34716065179064699426),
    (0.5, 0.5, 0.1, 0.47454388555084362275),
    (0.5, 0.5, 0.5, 0.25634441145129334951),
    (0.5, 0.5, 1.0, 0.13660600739194928254),
    (0.5, 0.5, 2.0, 0.053398230926744799218),
    (0.5, 0.5, 5.0, 0.010666394882413155097),
    (0.5, 0.5, 10.0, 0.0027796561095304283729),
    (0.5, 1.0, 0.1, 0.89645697996912664193),
    (0.5, 1.0, 0.5, 0.61569034419292587487),
    (0.5, 1.0, 1.0, 0.42758357615580700441),
    (0.5, 1.0, 2.0, 0.25539567631050574387),
    (0.5, 1.0, 5.0, 0.11070463773306862637),
    (0.5, 1.0, 10.0, 0.056140992743822585858),
    (0.5, 1.5, 0.1, 1.0354302003087335807),
    (0.5, 1.5, 0.5, 0.76861931161414825026),
    (0.5, 1.5, 1.0, 0.57241642384419299559),
    (0.5, 1.5, 2.0, 0.37230216184474712807),
    (0.5, 1.5, 5.0, 0.17785907245338627473),
    (0.5, 1.5, 10.0, 0.094385900725617741414),
    (0.8, 0.8, 0.1, 0.75467353071832539786),
    (0.8, 0.8, 0.5, 0.45793149810111437333),
    (0.8, 0.8, 1.0, 0.25574384475824187052),
    (0.8, 0.8, 2.0, 0.092077465517931649009),
    (0.8, 0.8, 5.0, 0.011828729724994502315),
    (0.8, 0.8, 10.0, 0.0022770080856945369187),
    (0.8, 1.0, 0.1, 0.89930476821448514298),
    (0.8, 1.0, 0.5, 0.60302371586280370036),
    (0.8, 1.0, 1.0, 0.38694857861897685146),
    (0.8, 1.0, 2.0, 0.1897966923637056596),
    (0.8, 1.0, 5.0, 0.05759538476215225377),
    (0.8, 1.0, 10.0, 0.024902819761976537376),
    (0.8, 1.8, 0.1, 1.0069523178551485702),
    (0.8, 1.8, 0.5, 0.79395256827439259928),
    (0.8, 1.8, 1.0, 0.61305142138102314854),
    (0.8, 1.8, 2.0, 0.4051016538181471702),
    (0.8, 1.8, 5.0, 0.18848092304756954925),
    (0.8, 1.8, 10.0, 0.097509718023802346262),
    (0.95, 0.95, 0.1, 0.87103958489859636472),
    (0.95, 0.95, 0.5, 0.56928324669753816136),
    (0.95, 0.95, 1.0, 0.33712250268371991166),
    (0.95, 0.95, 2.0, 0.1220131765462609838),
    (0.95, 0.95, 5.0, 0.0087528567620237399214),
    (0.95, 0.95, 10.0, 0.00082191087848318474863),
    (0.95, 0.95, 50.0, 0.000021082326114074833761),
    (0.95, 1.0, 0.1, 0.90322405462807574702),
    (0.95, 1.0, 0.5, 0.60461402734213172754),
    (0.95, 1.0, 1.0, 0.37157362003067881032),
    (0.95, 1.0, 2.0, 0.14962506184111459529),
    (0.95, 1.0, 5.0, 0.021268437291731109074),
    (0.95, 1.0, 10.0, 0.0065071353122560575398),
    (0.95, 1.0, 50.0, 0.001067234039220842002),
    (0.95, 1.95, 0.1, 0.96775945371924252977),
    (0.95, 1.95, 0.5, 0.79077194531573654491),
    (0.95, 1.95, 1.0, 0.62842637996932118968),
    (0.95, 1.95, 2.0, 0.42518746907944270236),
    (0.95, 1.95, 5.0, 0.19574631254165377819),
    (0.95, 1.95, 10.0, 0.099349286468774394246),
    (0.95, 1.95, 50.0, 0.01997865531921558316),
];

#[test]
fn matches_high_precision_series() {
    let mut worst = 0.0f64;
    let mut bad = Vec::new();
    for &(alpha, beta, x, exact) in TABLE {
        let got = mittag_leffler(alpha, beta, -x).unwrap();
        let err = (got - exact).abs() / exact.abs().max(1e-3);
        worst = worst.max(err);
        if err >= 1e-11 {
            bad.push(format!("alpha={alpha} beta={beta} x={x}: got {got}, exact {exact}, err {err:.1e}"));
        }
    }
    println!("worst relative error {worst:.2e}");
    assert!(bad.is_empty(), "{}", bad.join("\n"));
}
