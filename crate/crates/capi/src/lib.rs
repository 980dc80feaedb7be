//! C ABI over the epq codec. All objects cross the boundary as opaque
//! handles paired with explicit free functions; every fallible call
//! returns an [`EpqStatus`] code. The matching header is maintained at
//! `include/epq.h`.

use epq::codec::{
    decode_image, encode_image, CodecConfig, CodecError, ColorSpace, Profile,
};
use epq::image_io::{read_pnm, write_pnm, Image};
use std::ffi::{c_char, c_int, CStr};

/// Status codes shared with the C side.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EpqStatus {
    Ok = 0,
    NullArgument = 1,
    InvalidArgument = 2,
    Unsupported = 3,
    Malformed = 4,
    Io = 5,
}

fn status_of(err: &CodecError) -> EpqStatus {
    match err {
        CodecError::BadConfig(_) => EpqStatus::InvalidArgument,
        CodecError::Unsupported(_) => EpqStatus::Unsupported,
        CodecError::Fit(_) => EpqStatus::InvalidArgument,
        _ => EpqStatus::Malformed,
    }
}

/// Owned byte buffer handed to C callers.
pub struct EpqBuffer {
    data: Vec<u8>,
}

/// Decoded image handed to C callers (interleaved 8-bit samples).
pub struct EpqImage {
    img: Image,
}

/// Static, NUL-terminated version string.
#[no_mangle]
pub extern "C" fn epq_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

/// Short NUL-terminated description of a status code.
#[no_mangle]
pub extern "C" fn epq_status_message(status: EpqStatus) -> *const c_char {
    let msg: &'static str = match status {
        EpqStatus::Ok => "ok\0",
        EpqStatus::NullArgument => "null argument\0",
        EpqStatus::InvalidArgument => "invalid argument\0",
        EpqStatus::Unsupported => "unsupported input\0",
        EpqStatus::Malformed => "malformed container\0",
        EpqStatus::Io => "io error\0",
    };
    msg.as_ptr() as *const c_char
}

/// Encode interleaved 8-bit pixels (1 or 3 channels) into a container.
///
/// `quality` is 1..=100; `profile` and `colorspace` take the wire codes
/// from the header. On success `*out` owns the payload until
/// [`epq_buffer_free`].
///
/// # Safety
/// `pixels` must point to `width * height * channels` readable bytes and
/// `out` to a writable pointer slot; both must be non-null.
#[no_mangle]
pub unsafe extern "C" fn epq_encode(
    pixels: *const u8,
    width: u32,
    height: u32,
    channels: u8,
    quality: u8,
    profile: u8,
    colorspace: u8,
    embed_models: c_int,
    out: *mut *mut EpqBuffer,
) -> EpqStatus {
    if pixels.is_null() || out.is_null() {
        return EpqStatus::NullArgument;
    }
    if (channels != 1 && channels != 3) || width == 0 || height == 0 {
        return EpqStatus::InvalidArgument;
    }
    let (Ok(profile), Ok(colorspace)) = (Profile::from_code(profile), ColorSpace::from_code(colorspace))
    else {
        return EpqStatus::InvalidArgument;
    };
    if !(1..=100).contains(&quality) {
        return EpqStatus::InvalidArgument;
    }
    let len = width as usize * height as usize * channels as usize;
    let data = std::slice::from_raw_parts(pixels, len).to_vec();
    let img = Image::new(width as usize, height as usize, channels as usize, data);
    let config = CodecConfig {
        colorspace,
        quality,
        profile,
        embed_models: embed_models != 0,
        ..CodecConfig::default()
    };
    match encode_image(&img, &config, None) {
        Ok(bytes) => {
            *out = Box::into_raw(Box::new(EpqBuffer { data: bytes }));
            EpqStatus::Ok
        }
        Err(e) => status_of(&e),
    }
}

/// # Safety
/// `buf` must be a live pointer returned by this library, or null.
#[no_mangle]
pub unsafe extern "C" fn epq_buffer_data(buf: *const EpqBuffer) -> *const u8 {
    if buf.is_null() {
        return std::ptr::null();
    }
    (*buf).data.as_ptr()
}

/// # Safety
/// `buf` must be a live pointer returned by this library, or null.
#[no_mangle]
pub unsafe extern "C" fn epq_buffer_len(buf: *const EpqBuffer) -> usize {
    if buf.is_null() {
        return 0;
    }
    (*buf).data.len()
}

/// # Safety
/// `buf` must originate from this library and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn epq_buffer_free(buf: *mut EpqBuffer) {
    if !buf.is_null() {
        drop(Box::from_raw(buf));
    }
}

/// Decode a container into an image handle.
///
/// # Safety
/// `bytes` must point to `len` readable bytes; `out` must be non-null.
#[no_mangle]
pub unsafe extern "C" fn epq_decode(bytes: *const u8, len: usize, out: *mut *mut EpqImage) -> EpqStatus {
    if bytes.is_null() || out.is_null() {
        return EpqStatus::NullArgument;
    }
    let data = std::slice::from_raw_parts(bytes, len);
    match decode_image(data) {
        Ok((img, _stats)) => {
            *out = Box::into_raw(Box::new(EpqImage { img }));
            EpqStatus::Ok
        }
        Err(e) => status_of(&e),
    }
}

/// # Safety
/// `img` must be a live pointer returned by this library, or null.
#[no_mangle]
pub unsafe extern "C" fn epq_image_width(img: *const EpqImage) -> u32 {
    if img.is_null() {
        0
    } else {
        (*img).img.width as u32
    }
}

/// # Safety
/// `img` must be a live pointer returned by this library, or null.
#[no_mangle]
pub unsafe extern "C" fn epq_image_height(img: *const EpqImage) -> u32 {
    if img.is_null() {
        0
    } else {
        (*img).img.height as u32
    }
}

/// # Safety
/// `img` must be a live pointer returned by this library, or null.
#[no_mangle]
pub unsafe extern "C" fn epq_image_channels(img: *const EpqImage) -> u8 {
    if img.is_null() {
        0
    } else {
        (*img).img.channels as u8
    }
}

/// Interleaved 8-bit samples; valid until [`epq_image_free`].
///
/// # Safety
/// `img` must be a live pointer returned by this library, or null.
#[no_mangle]
pub unsafe extern "C" fn epq_image_pixels(img: *const EpqImage) -> *const u8 {
    if img.is_null() {
        return std::ptr::null();
    }
    (*img).img.data.as_ptr()
}

/// # Safety
/// `img` must originate from this library and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn epq_image_free(img: *mut EpqImage) {
    if !img.is_null() {
        drop(Box::from_raw(img));
    }
}

/// Encode a PGM/PPM file to a container file.
///
/// # Safety
/// Both paths must be NUL-terminated C strings.
#[no_mangle]
pub unsafe extern "C" fn epq_encode_file(
    input_path: *const c_char,
    output_path: *const c_char,
    quality: u8,
    profile: u8,
) -> EpqStatus {
    if input_path.is_null() || output_path.is_null() {
        return EpqStatus::NullArgument;
    }
    let (Ok(input), Ok(output)) = (
        CStr::from_ptr(input_path).to_str(),
        CStr::from_ptr(output_path).to_str(),
    ) else {
        return EpqStatus::InvalidArgument;
    };
    let Ok(profile) = Profile::from_code(profile) else {
        return EpqStatus::InvalidArgument;
    };
    let Ok(bytes) = std::fs::read(input) else {
        return EpqStatus::Io;
    };
    let Ok(img) = read_pnm(&bytes) else {
        return EpqStatus::Malformed;
    };
    let config = CodecConfig { quality, profile, ..CodecConfig::default() };
    match encode_image(&img, &config, None) {
        Ok(coded) => {
            if std::fs::write(output, coded).is_err() {
                return EpqStatus::Io;
            }
            EpqStatus::Ok
        }
        Err(e) => status_of(&e),
    }
}

/// Decode a container file to a PGM/PPM file.
///
/// # Safety
/// Both paths must be NUL-terminated C strings.
#[no_mangle]
pub unsafe extern "C" fn epq_decode_file(input_path: *const c_char, output_path: *const c_char) -> EpqStatus {
    if input_path.is_null() || output_path.is_null() {
        return EpqStatus::NullArgument;
    }
    let (Ok(input), Ok(output)) = (
        CStr::from_ptr(input_path).to_str(),
        CStr::from_ptr(output_path).to_str(),
    ) else {
        return EpqStatus::InvalidArgument;
    };
    let Ok(bytes) = std::fs::read(input) else {
        return EpqStatus::Io;
    };
    match decode_image(&bytes) {
        Ok((img, _)) => {
            if std::fs::write(output, write_pnm(&img)).is_err() {
                return EpqStatus::Io;
            }
            EpqStatus::Ok
        }
        Err(e) => status_of(&e),
    }
}
