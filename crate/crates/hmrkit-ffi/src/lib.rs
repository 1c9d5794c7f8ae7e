#[no_mangle]
pub extern "C" fn hk_placeholder() -> u32 { hmrkit::placeholder() }
