//! Where the tools get passwords from.

use std::io;

use zeroize::Zeroizing;

/// Names a file descriptor to read the password from instead of the
/// terminal. Only the first line is used.
pub const PASSWORD_FD_ENV: &str = "MUTUAL_PASSWORD_FD";

/// Reads a password from the descriptor in [`PASSWORD_FD_ENV`] if set,
/// otherwise prompts on the terminal without echo.
pub fn read_password(prompt: &str) -> io::Result<Zeroizing<String>> {
    match std::env::var(PASSWORD_FD_ENV) {
        Ok(fd) => read_from_fd(&fd),
        Err(_) => rpassword::prompt_password(prompt).map(Zeroizing::new),
    }
}

fn read_from_fd(fd: &str) -> io::Result<Zeroizing<String>> {
    let fd: u32 = fd
        .trim()
        .parse()
        .map_err(|_| io::Error::new(io::ErrorKind::InvalidInput, format!("{PASSWORD_FD_ENV} is not a descriptor number")))?;
    let text = Zeroizing::new(std::fs::read_to_string(format!("/dev/fd/{fd}"))?);
    Ok(first_line(&text))
}

fn first_line(text: &str) -> Zeroizing<String> {
    Zeroizing::new(text.lines().next().unwrap_or("").to_owned())
}
