//! GSL and ISL capacity across elevation and range with the default
//! channel parameters.

use skylink::channel::{
    atmospheric_attenuation, free_space_path_loss_db, gsl_capacity, isl_capacity, propagation_delay, ChannelParams,
};
use skylink::ephemeris::DEFAULT_EARTH_RADIUS_M;

/// Slant range to a satellite at `alt_m` seen at `elev_deg`.
fn slant_range(elev_deg: f64, alt_m: f64) -> f64 {
    let r = DEFAULT_EARTH_RADIUS_M;
    let e = elev_deg.to_radians();
    ((r + alt_m).powi(2) - (r * e.cos()).powi(2)).sqrt() - r * e.sin()
}

fn main() -> skylink::Result<()> {
    let p = ChannelParams::default();
    let alt = 1_200e3;
    println!("ground-satellite link, {:.0} km shell", alt / 1e3);
    println!("{:>6} {:>9} {:>9} {:>9} {:>10} {:>9}", "elev", "range_km", "fspl_dB", "atm_dB", "cap_Mbps", "delay_ms");
    for elev in [10.0, 15.0, 20.0, 25.0, 30.0, 40.0, 50.0, 60.0, 75.0, 90.0] {
        let d = slant_range(elev, alt);
        println!(
            "{:>6.0} {:>9.0} {:>9.2} {:>9.2} {:>10.2} {:>9.3}",
            elev,
            d / 1e3,
            free_space_path_loss_db(d, &p),
            atmospheric_attenuation(elev, &p)?,
            gsl_capacity(d, elev, &p)? / 1e6,
            propagation_delay(d, &p) * 1e3
        );
    }
    println!("\ninter-satellite link");
    println!("{:>9} {:>10} {:>9}", "range_km", "cap_Gbps", "delay_ms");
    for d_km in [250.0, 500.0, 1_000.0, 2_000.0, 3_000.0, 5_000.0] {
        let d = d_km * 1e3;
        println!("{:>9.0} {:>10.3} {:>9.3}", d_km, isl_capacity(d, &p)? / 1e9, propagation_delay(d, &p) * 1e3);
    }
    Ok(())
}
