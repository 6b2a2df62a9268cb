"""
Exception Classes for the Archipelago Calculus
Every exception knows its HTTP status and its CLI exit code.
"""

from typing import Any, Dict, Optional

from fastapi import status


class AppException(Exception):
    """
    Base exception class for all calculus errors.

    Attributes:
        message: Human-readable error message
        status_code: HTTP status code
        details: Additional error details
    """

    exit_code: int = 1

    def __init__(
        self,
        message: str,
        status_code: int = status.HTTP_500_INTERNAL_SERVER_ERROR,
        details: Optional[Dict[str, Any]] = None
    ):
        self.message = message
        self.status_code = status_code
        self.details = details or {}
        super().__init__(self.message)

    def __str__(self) -> str:
        return f"{self.__class__.__name__}: {self.message}"

    def __repr__(self) -> str:
        return (
            f"{self.__class__.__name__}("
            f"message='{self.message}', "
            f"status_code={self.status_code}, "
            f"details={self.details})"
        )


class ParseException(AppException):
    """
    Raised when a word/schema expression or an element literal does not parse.
    """

    exit_code = 2

    def __init__(
        self,
        message: str = "Parse error",
        details: Optional[Dict[str, Any]] = None
    ):
        super().__init__(
            message=message,
            status_code=status.HTTP_400_BAD_REQUEST,
            details=details
        )


class ConfigException(AppException):
    """
    Raised when a family, letter map or profile file is malformed.
    """

    exit_code = 2

    def __init__(
        self,
        message: str = "Configuration error",
        details: Optional[Dict[str, Any]] = None
    ):
        super().__init__(
            message=message,
            status_code=status.HTTP_400_BAD_REQUEST,
            details=details
        )


class ContractViolation(AppException):
    """
    Raised when an operation's precondition does not hold.
    """

    exit_code = 3

    def __init__(
        self,
        message: str = "Contract violation",
        details: Optional[Dict[str, Any]] = None
    ):
        super().__init__(
            message=message,
            status_code=status.HTTP_422_UNPROCESSABLE_ENTITY,
            details=details
        )


class UnsupportedException(ContractViolation):
    """
    Raised when the input is well-formed but outside what the calculus decides.
    """

    def __init__(
        self,
        message: str = "Unsupported input",
        details: Optional[Dict[str, Any]] = None
    ):
        super().__init__(message=message, details=details)


class MappingException(ContractViolation):
    """
    Raised when a letter map has no image (or preimage) for an element.
    """

    def __init__(
        self,
        message: str = "Letter image undefined",
        details: Optional[Dict[str, Any]] = None
    ):
        super().__init__(message=message, details=details)


class ClassificationException(ContractViolation):
    """
    Raised when an involution would have to map into an involution-free target.
    """

    def __init__(
        self,
        message: str = "Involution has no image in target",
        details: Optional[Dict[str, Any]] = None
    ):
        super().__init__(message=message, details=details)


class ResourceBudgetExceeded(AppException):
    """
    Raised when a projection would exceed the configured word-size budget.
    """

    exit_code = 4

    def __init__(
        self,
        message: str = "Word-size budget exceeded",
        details: Optional[Dict[str, Any]] = None
    ):
        super().__init__(
            message=message,
            status_code=status.HTTP_413_REQUEST_ENTITY_TOO_LARGE,
            details=details
        )
